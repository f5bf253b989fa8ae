// Copyright 2026 The KOAP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KOAP_KOOPMAN_MODEL_HPP_
#define KOAP_KOOPMAN_MODEL_HPP_

#include <optional>
#include <string>
#include <vector>

#include "koap/numerics/grad.hpp"
#include "koap/numerics/mlp.hpp"
#include "koap/numerics/normalizer.hpp"
#include "koap/numerics/seq_encoder.hpp"
#include "koap/train_settings.hpp"
#include "koap/trajectory.hpp"

namespace koap::koopman {

// Latent transition: a linear Koopman step K z + u, or (variant) a learned
// network over (z, u). The action decoder is affine by default; the variant
// swaps in a small network.
enum class DynamicsKind { kLinear, kMlp };
enum class ActionDecoderKind { kAffine, kMlp };

struct KoapConfig {
  Index state_dim = 2;
  Index action_dim = 2;
  Index latent_dim = 8;  // m; lifting works best with m >= state_dim
  int history = 2;       // n
  int horizon = 12;      // k

  std::vector<Index> encoder_hidden = {64, 64};
  numerics::Activation activation = numerics::Activation::kTanh;
  Index predictor_hidden = 64;
  numerics::RecurrentCell cell = numerics::RecurrentCell::kGru;

  DynamicsKind dynamics = DynamicsKind::kLinear;
  std::vector<Index> dynamics_hidden = {64};
  ActionDecoderKind action_decoder = ActionDecoderKind::kAffine;
  std::vector<Index> action_decoder_hidden = {32};

  double lambda_kpm = 1.0;
  double lambda_action = 10.0;

  TrainSettings train;
  TrainSettings finetune;  // used by the pretrain/finetune variant

  int window_len() const { return history + 1 + horizon; }
  numerics::MlpSpec encoder_spec() const;
  numerics::MlpSpec decoder_spec() const;
  numerics::SeqEncoderSpec predictor_spec() const;
  numerics::MlpSpec dynamics_spec() const;
  numerics::MlpSpec action_decoder_spec() const;
  void validate() const;
};

// Parameter layout handles for one model instance.
struct KoapStructure {
  numerics::MlpParams encoder;
  numerics::MlpParams decoder;
  std::optional<numerics::ParamVector::Segment> koopman;  // linear dynamics
  numerics::MlpParams dynamics_mlp;
  numerics::SeqEncoderParams predictor;
  std::optional<numerics::ParamVector::Segment> action_w;  // affine decoder
  std::optional<numerics::ParamVector::Segment> action_b;
  numerics::MlpParams action_mlp;
};

class KoapModel {
 public:
  static KoapModel create(const KoapConfig& cfg,
                          const numerics::Normalizer& norm,
                          std::uint64_t init_seed);

  const KoapConfig& config() const { return cfg_; }
  const KoapStructure& structure() const { return structure_; }
  const numerics::ParamVector& params() const { return params_; }
  numerics::ParamVector& params() { return params_; }
  const numerics::Normalizer& normalizer() const { return norm_; }

  // Lift a raw state into the m-dimensional observation space.
  Vec encode(const Vec& x) const;
  // Autoencoder decode back to a raw state.
  Vec decode_state(const Vec& z) const;
  // z' = K z + u. Only defined for linear dynamics.
  Vec koopman_step(const Vec& z, const Vec& u) const;
  // Latent transition under the configured dynamics kind.
  Vec latent_step(const Vec& z, const Vec& u) const;
  // One latent action per future transition of the window (k of them).
  std::vector<Vec> predict_latent_actions(const StateWindow& window) const;
  // Map a latent action to a real action.
  Vec decode_action(const Vec& u) const;

  // Assemble the window from history + planned states and decode one real
  // action per planned transition. plan is (1 + k) x state_dim with the
  // current state in row 0; the result is k x action_dim.
  Mat infer_actions(const std::vector<Vec>& history, const Mat& plan) const;

  // Predicted next states for the k future transitions of a window,
  // decode(latent_step(encode(x_t), u_t)); used for model-quality checks.
  Mat predict_transitions(const StateWindow& window) const;

  void save(const std::string& path) const;
  static KoapModel load(const std::string& path);

  TrainLog train_log;

 private:
  KoapModel() = default;
  KoapConfig cfg_;
  KoapStructure structure_;
  numerics::ParamVector params_;
  numerics::Normalizer norm_;
};

// Squared-error losses over raw (unnormalized) inputs; states are
// standardized internally with the model's normalizer. Each is the mean of
// per-item squared norms.
double loss_recon(const KoapModel& model, const std::vector<Vec>& states);
double loss_kpm(const KoapModel& model,
                const std::vector<StateWindow>& windows);
double loss_action(const KoapModel& model,
                   const std::vector<StateWindow>& windows);
// loss_recon + lambda_kpm * loss_kpm + lambda_action * loss_action, with the
// action term computed over labeled windows only and dropped when there are
// none. Parameter regularization is handled by optimizer weight decay.
double total_loss(const KoapModel& model,
                  const std::vector<StateWindow>& windows,
                  const KoapConfig& cfg);

// Graph builder shared by the losses above and the trainer. Windows must
// already be normalized. Weights of zero skip the corresponding term.
void add_koap_loss(numerics::Tape& tape, const KoapConfig& cfg,
                   const KoapStructure& s,
                   const std::vector<const StateWindow*>& normalized_windows,
                   double w_recon, double w_kpm, double w_action);

StateWindow normalize_window(const numerics::Normalizer& norm,
                             const StateWindow& w);

// Jointly trains encoder, decoder, dynamics, latent-action predictor, and
// (when labels exist) the action decoder. dx provides observation-only
// windows; da may be empty, in which case the action term is omitted and the
// action decoder stays at its initialization.
KoapModel train_koap(const std::vector<Trajectory>& dx,
                     const std::vector<Trajectory>& da,
                     const KoapConfig& cfg);

// Continues training an existing model on labeled windows only (used by the
// pretrain/finetune variant).
void finetune_koap(KoapModel& model, const std::vector<Trajectory>& da,
                   const TrainSettings& settings);

}  // namespace koap::koopman

#endif  // KOAP_KOOPMAN_MODEL_HPP_

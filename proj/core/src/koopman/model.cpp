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

#include "koap/koopman/model.hpp"

#include <json.hpp>

#include "koap/numerics/checkpoint.hpp"

namespace koap::koopman {

using numerics::Activation;
using numerics::MlpSpec;
using numerics::ParamVector;
using numerics::SeqEncoderSpec;
using numerics::Tape;

MlpSpec KoapConfig::encoder_spec() const {
  MlpSpec s;
  s.widths.push_back(state_dim);
  for (Index h : encoder_hidden) s.widths.push_back(h);
  s.widths.push_back(latent_dim);
  s.activation = activation;
  return s;
}

MlpSpec KoapConfig::decoder_spec() const {
  MlpSpec s;
  s.widths.push_back(latent_dim);
  for (Index h : encoder_hidden) s.widths.push_back(h);
  s.widths.push_back(state_dim);
  s.activation = activation;
  return s;
}

SeqEncoderSpec KoapConfig::predictor_spec() const {
  SeqEncoderSpec s;
  s.input_dim = state_dim;
  s.hidden_dim = predictor_hidden;
  s.output_dim = latent_dim;
  s.cell = cell;
  return s;
}

MlpSpec KoapConfig::dynamics_spec() const {
  MlpSpec s;
  s.widths.push_back(2 * latent_dim);
  for (Index h : dynamics_hidden) s.widths.push_back(h);
  s.widths.push_back(latent_dim);
  s.activation = activation;
  return s;
}

MlpSpec KoapConfig::action_decoder_spec() const {
  MlpSpec s;
  s.widths.push_back(latent_dim);
  if (action_decoder == ActionDecoderKind::kMlp) {
    for (Index h : action_decoder_hidden) s.widths.push_back(h);
  }
  s.widths.push_back(action_dim);
  s.activation = activation;
  return s;
}

void KoapConfig::validate() const {
  if (state_dim < 1 || action_dim < 1 || latent_dim < 1) {
    throw ConfigError("koap dims must be positive");
  }
  if (history < 0 || horizon < 1) {
    throw ConfigError("koap window needs history >= 0 and horizon >= 1");
  }
  if (lambda_kpm < 0 || lambda_action < 0) {
    throw ConfigError("koap loss weights must be non-negative");
  }
}

KoapModel KoapModel::create(const KoapConfig& cfg,
                            const numerics::Normalizer& norm,
                            std::uint64_t init_seed) {
  cfg.validate();
  if (norm.dim() != cfg.state_dim) {
    throw ConfigError("normalizer dim does not match state dim");
  }
  KoapModel m;
  m.cfg_ = cfg;
  m.norm_ = norm;

  ParamVector::Builder b;
  m.structure_.encoder = numerics::register_mlp(b, "enc", cfg.encoder_spec());
  m.structure_.decoder = numerics::register_mlp(b, "dec", cfg.decoder_spec());
  if (cfg.dynamics == DynamicsKind::kLinear) {
    m.structure_.koopman = b.add("K", {cfg.latent_dim, cfg.latent_dim});
  } else {
    m.structure_.dynamics_mlp =
        numerics::register_mlp(b, "dyn", cfg.dynamics_spec());
  }
  m.structure_.predictor =
      numerics::register_seq_encoder(b, "f", cfg.predictor_spec());
  if (cfg.action_decoder == ActionDecoderKind::kAffine) {
    m.structure_.action_w = b.add("act.w", {cfg.action_dim, cfg.latent_dim});
    m.structure_.action_b = b.add("act.b", {cfg.action_dim});
  } else {
    m.structure_.action_mlp =
        numerics::register_mlp(b, "act", cfg.action_decoder_spec());
  }
  m.params_ = b.build();

  Rng rng(init_seed);
  numerics::init_mlp(m.params_, m.structure_.encoder, rng);
  numerics::init_mlp(m.params_, m.structure_.decoder, rng);
  if (m.structure_.koopman) {
    m.params_.mat(*m.structure_.koopman).setIdentity();
  } else {
    numerics::init_mlp(m.params_, m.structure_.dynamics_mlp, rng);
  }
  numerics::init_seq_encoder(m.params_, m.structure_.predictor, rng);
  if (m.structure_.action_w) {
    double bound = std::sqrt(6.0 / double(cfg.action_dim + cfg.latent_dim));
    std::uniform_real_distribution<double> u(-bound, bound);
    auto w = m.params_.mat(*m.structure_.action_w);
    for (Index c = 0; c < w.cols(); ++c) {
      for (Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
    }
    m.params_.vec(*m.structure_.action_b).setZero();
  } else {
    numerics::init_mlp(m.params_, m.structure_.action_mlp, rng);
  }
  return m;
}

Vec KoapModel::encode(const Vec& x) const {
  if (x.size() != cfg_.state_dim) throw ConfigError("encode: bad state dim");
  return numerics::mlp_forward(cfg_.encoder_spec(), structure_.encoder,
                               params_, norm_.normalize(x));
}

Vec KoapModel::decode_state(const Vec& z) const {
  if (z.size() != cfg_.latent_dim) throw ConfigError("decode: bad latent dim");
  return norm_.denormalize(numerics::mlp_forward(
      cfg_.decoder_spec(), structure_.decoder, params_, z));
}

Vec KoapModel::koopman_step(const Vec& z, const Vec& u) const {
  if (!structure_.koopman) {
    throw ConfigError("koopman_step on a model with nonlinear dynamics");
  }
  if (z.size() != cfg_.latent_dim || u.size() != cfg_.latent_dim) {
    throw ConfigError("koopman_step: latent dim mismatch");
  }
  return params_.mat(*structure_.koopman) * z + u;
}

Vec KoapModel::latent_step(const Vec& z, const Vec& u) const {
  if (structure_.koopman) return koopman_step(z, u);
  Vec zu(2 * cfg_.latent_dim);
  zu << z, u;
  return numerics::mlp_forward(cfg_.dynamics_spec(), structure_.dynamics_mlp,
                               params_, zu);
}

std::vector<Vec> KoapModel::predict_latent_actions(
    const StateWindow& window) const {
  window.validate();
  if (static_cast<int>(window.states.size()) != cfg_.window_len() ||
      window.history != cfg_.history) {
    throw WindowError("window shape does not match model (need " +
                      std::to_string(cfg_.window_len()) + " states)");
  }
  std::vector<Vec> normalized;
  normalized.reserve(window.states.size());
  for (const Vec& s : window.states) normalized.push_back(norm_.normalize(s));
  std::vector<Vec> outs = numerics::seq_forward(
      cfg_.predictor_spec(), structure_.predictor, params_, normalized);
  // Outputs align with consecutive state pairs; the last k are the future
  // transitions.
  std::vector<Vec> latents(outs.end() - cfg_.horizon, outs.end());
  return latents;
}

Vec KoapModel::decode_action(const Vec& u) const {
  if (u.size() != cfg_.latent_dim) {
    throw ConfigError("decode_action: latent dim mismatch");
  }
  if (structure_.action_w) {
    return params_.mat(*structure_.action_w) * u +
           params_.vec(*structure_.action_b);
  }
  return numerics::mlp_forward(cfg_.action_decoder_spec(),
                               structure_.action_mlp, params_, u);
}

Mat KoapModel::infer_actions(const std::vector<Vec>& history,
                             const Mat& plan) const {
  if (static_cast<int>(history.size()) != cfg_.history) {
    throw ConfigError("infer_actions: expected " +
                      std::to_string(cfg_.history) + " history states");
  }
  if (plan.rows() != cfg_.horizon + 1 || plan.cols() != cfg_.state_dim) {
    throw ConfigError("infer_actions: plan must be (k+1) x state_dim");
  }
  StateWindow w;
  w.history = cfg_.history;
  for (const Vec& h : history) w.states.push_back(h);
  for (Index r = 0; r < plan.rows(); ++r) {
    w.states.push_back(plan.row(r).transpose());
  }
  std::vector<Vec> latents = predict_latent_actions(w);
  Mat actions(cfg_.horizon, cfg_.action_dim);
  for (int j = 0; j < cfg_.horizon; ++j) {
    actions.row(j) = decode_action(latents[j]).transpose();
  }
  return actions;
}

Mat KoapModel::predict_transitions(const StateWindow& window) const {
  std::vector<Vec> latents = predict_latent_actions(window);
  Mat next(cfg_.horizon, cfg_.state_dim);
  for (int j = 0; j < cfg_.horizon; ++j) {
    Vec z = encode(window.states[cfg_.history + j]);
    next.row(j) = decode_state(latent_step(z, latents[j])).transpose();
  }
  return next;
}

StateWindow normalize_window(const numerics::Normalizer& norm,
                             const StateWindow& w) {
  StateWindow out = w;
  for (Vec& s : out.states) s = norm.normalize(s);
  return out;
}

void add_koap_loss(Tape& tape, const KoapConfig& cfg, const KoapStructure& s,
                   const std::vector<const StateWindow*>& windows,
                   double w_recon, double w_kpm, double w_action) {
  if (windows.empty()) throw ConfigError("koap loss on empty batch");
  const int n = cfg.history;
  const int k = cfg.horizon;

  std::size_t n_states = 0, n_trans = 0, n_labeled = 0;
  for (const StateWindow* w : windows) {
    n_states += w->states.size();
    n_trans += static_cast<std::size_t>(k);
    if (w->labeled()) n_labeled += static_cast<std::size_t>(k);
  }
  if (w_action > 0.0 && n_labeled == 0) {
    throw LabelError("action loss requested on a batch without labels");
  }

  const MlpSpec enc_spec = cfg.encoder_spec();
  const MlpSpec dec_spec = cfg.decoder_spec();
  const SeqEncoderSpec f_spec = cfg.predictor_spec();
  const MlpSpec dyn_spec = cfg.dynamics_spec();
  const MlpSpec act_spec = cfg.action_decoder_spec();

  for (const StateWindow* w : windows) {
    if (static_cast<int>(w->states.size()) != n + 1 + k) {
      throw WindowError("koap loss: window length mismatch");
    }
    std::vector<Tape::NodeId> xs;
    xs.reserve(w->states.size());
    for (const Vec& st : w->states) xs.push_back(tape.constant(st));

    std::vector<Tape::NodeId> zs;
    if (w_recon > 0.0 || w_kpm > 0.0) {
      zs.reserve(xs.size());
      for (Tape::NodeId x : xs) {
        zs.push_back(numerics::mlp_forward(tape, enc_spec, s.encoder, x));
      }
    }
    if (w_recon > 0.0) {
      for (std::size_t i = 0; i < xs.size(); ++i) {
        Tape::NodeId rec =
            numerics::mlp_forward(tape, dec_spec, s.decoder, zs[i]);
        tape.add_squared_norm(tape.sub(rec, xs[i]),
                              w_recon / static_cast<double>(n_states));
      }
    }

    std::vector<Tape::NodeId> f_outs;
    if (w_kpm > 0.0 || (w_action > 0.0 && w->labeled())) {
      f_outs = numerics::seq_forward(tape, f_spec, s.predictor, xs);
    }

    if (w_kpm > 0.0) {
      for (int j = 0; j < k; ++j) {
        Tape::NodeId u = f_outs[n + j];
        Tape::NodeId pred;
        if (s.koopman) {
          pred = tape.add(tape.matvec(*s.koopman, zs[n + j]), u);
        } else {
          Tape::NodeId zu = tape.concat(zs[n + j], u);
          pred = numerics::mlp_forward(tape, dyn_spec, s.dynamics_mlp, zu);
        }
        tape.add_squared_norm(tape.sub(pred, zs[n + j + 1]),
                              w_kpm / static_cast<double>(n_trans));
      }
    }

    if (w_action > 0.0 && w->labeled()) {
      for (int j = 0; j < k; ++j) {
        Tape::NodeId u = f_outs[n + j];
        Tape::NodeId a;
        if (s.action_w) {
          a = tape.linear(*s.action_w, *s.action_b, u);
        } else {
          a = numerics::mlp_forward(tape, act_spec, s.action_mlp, u);
        }
        Tape::NodeId label = tape.constant(w->actions[j]);
        tape.add_squared_norm(tape.sub(a, label),
                              w_action / static_cast<double>(n_labeled));
      }
    }
  }
}

namespace {

std::vector<const StateWindow*> ptrs(const std::vector<StateWindow>& ws) {
  std::vector<const StateWindow*> p;
  p.reserve(ws.size());
  for (const auto& w : ws) p.push_back(&w);
  return p;
}

}  // namespace

double loss_recon(const KoapModel& model, const std::vector<Vec>& states) {
  if (states.empty()) throw ConfigError("loss_recon on empty batch");
  // A batch of bare states is a degenerate window set; evaluate directly.
  double acc = 0.0;
  for (const Vec& x : states) {
    Vec xn = model.normalizer().normalize(x);
    Vec z = numerics::mlp_forward(model.config().encoder_spec(),
                                  model.structure().encoder, model.params(),
                                  xn);
    Vec rec = numerics::mlp_forward(model.config().decoder_spec(),
                                    model.structure().decoder, model.params(),
                                    z);
    acc += (rec - xn).squaredNorm();
  }
  return acc / static_cast<double>(states.size());
}

double loss_kpm(const KoapModel& model,
                const std::vector<StateWindow>& windows) {
  if (windows.empty()) throw ConfigError("loss_kpm on empty batch");
  std::vector<StateWindow> norm;
  norm.reserve(windows.size());
  for (const auto& w : windows) {
    norm.push_back(normalize_window(model.normalizer(), w));
  }
  auto builder = [&](Tape& tape) {
    add_koap_loss(tape, model.config(), model.structure(), ptrs(norm), 0.0,
                  1.0, 0.0);
  };
  return numerics::loss_value(builder, model.params());
}

double loss_action(const KoapModel& model,
                   const std::vector<StateWindow>& windows) {
  if (windows.empty()) throw ConfigError("loss_action on empty batch");
  for (const auto& w : windows) {
    if (!w.labeled()) {
      throw LabelError("loss_action requires labels on every window");
    }
  }
  std::vector<StateWindow> norm;
  norm.reserve(windows.size());
  for (const auto& w : windows) {
    norm.push_back(normalize_window(model.normalizer(), w));
  }
  auto builder = [&](Tape& tape) {
    add_koap_loss(tape, model.config(), model.structure(), ptrs(norm), 0.0,
                  0.0, 1.0);
  };
  return numerics::loss_value(builder, model.params());
}

double total_loss(const KoapModel& model,
                  const std::vector<StateWindow>& windows,
                  const KoapConfig& cfg) {
  if (windows.empty()) throw ConfigError("total_loss on empty batch");
  bool any_labeled = false;
  for (const auto& w : windows) any_labeled |= w.labeled();
  std::vector<StateWindow> norm;
  norm.reserve(windows.size());
  for (const auto& w : windows) {
    norm.push_back(normalize_window(model.normalizer(), w));
  }
  double w_action = any_labeled ? cfg.lambda_action : 0.0;
  auto builder = [&](Tape& tape) {
    add_koap_loss(tape, model.config(), model.structure(), ptrs(norm), 1.0,
                  cfg.lambda_kpm, w_action);
  };
  return numerics::loss_value(builder, model.params());
}

void KoapModel::save(const std::string& path) const {
  nlohmann::json extra;
  extra["kind"] = "koap";
  extra["config"] = {
      {"state_dim", cfg_.state_dim},
      {"action_dim", cfg_.action_dim},
      {"latent_dim", cfg_.latent_dim},
      {"history", cfg_.history},
      {"horizon", cfg_.horizon},
      {"encoder_hidden", cfg_.encoder_hidden},
      {"activation", cfg_.activation == Activation::kTanh ? "tanh" : "relu"},
      {"predictor_hidden", cfg_.predictor_hidden},
      {"cell", cfg_.cell == numerics::RecurrentCell::kGru ? "gru" : "lstm"},
      {"dynamics", cfg_.dynamics == DynamicsKind::kLinear ? "linear" : "mlp"},
      {"dynamics_hidden", cfg_.dynamics_hidden},
      {"action_decoder",
       cfg_.action_decoder == ActionDecoderKind::kAffine ? "affine" : "mlp"},
      {"action_decoder_hidden", cfg_.action_decoder_hidden},
      {"lambda_kpm", cfg_.lambda_kpm},
      {"lambda_action", cfg_.lambda_action},
  };
  extra["normalizer"] = {
      {"mean", std::vector<double>(norm_.mean.data(),
                                   norm_.mean.data() + norm_.mean.size())},
      {"std", std::vector<double>(norm_.std.data(),
                                  norm_.std.data() + norm_.std.size())},
  };
  extra["train_log"] = train_log.epoch_loss;
  numerics::save_checkpoint(path, params_, extra.dump());
}

KoapModel KoapModel::load(const std::string& path) {
  numerics::Checkpoint ck = numerics::load_checkpoint(path);
  nlohmann::json extra = nlohmann::json::parse(ck.extra_json);
  if (extra.at("kind") != "koap") {
    throw OrchestrationError("checkpoint at '" + path + "' is not a koap model");
  }
  const auto& jc = extra.at("config");
  KoapConfig cfg;
  cfg.state_dim = jc.at("state_dim");
  cfg.action_dim = jc.at("action_dim");
  cfg.latent_dim = jc.at("latent_dim");
  cfg.history = jc.at("history");
  cfg.horizon = jc.at("horizon");
  cfg.encoder_hidden = jc.at("encoder_hidden").get<std::vector<Index>>();
  cfg.activation = jc.at("activation") == "tanh" ? Activation::kTanh
                                                 : Activation::kRelu;
  cfg.predictor_hidden = jc.at("predictor_hidden");
  cfg.cell = jc.at("cell") == "gru" ? numerics::RecurrentCell::kGru
                                    : numerics::RecurrentCell::kLstm;
  cfg.dynamics = jc.at("dynamics") == "linear" ? DynamicsKind::kLinear
                                               : DynamicsKind::kMlp;
  cfg.dynamics_hidden = jc.at("dynamics_hidden").get<std::vector<Index>>();
  cfg.action_decoder = jc.at("action_decoder") == "affine"
                           ? ActionDecoderKind::kAffine
                           : ActionDecoderKind::kMlp;
  cfg.action_decoder_hidden =
      jc.at("action_decoder_hidden").get<std::vector<Index>>();
  cfg.lambda_kpm = jc.at("lambda_kpm");
  cfg.lambda_action = jc.at("lambda_action");

  const auto& jn = extra.at("normalizer");
  numerics::Normalizer norm;
  auto mean = jn.at("mean").get<std::vector<double>>();
  auto std_ = jn.at("std").get<std::vector<double>>();
  norm.mean = Eigen::Map<const Vec>(mean.data(), mean.size());
  norm.std = Eigen::Map<const Vec>(std_.data(), std_.size());

  KoapModel model = create(cfg, norm, 0);
  if (model.params_.size() != ck.params.size()) {
    throw OrchestrationError("checkpoint layout mismatch for '" + path + "'");
  }
  model.params_.values() = ck.params.values();
  if (extra.contains("train_log")) {
    model.train_log.epoch_loss =
        extra.at("train_log").get<std::vector<double>>();
  }
  return model;
}

}  // namespace koap::koopman

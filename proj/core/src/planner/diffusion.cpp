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

#include "koap/planner/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace koap::planner {

using numerics::Tape;

numerics::MlpSpec DiffusionSpec::denoiser_spec() const {
  numerics::MlpSpec s;
  s.widths.push_back(plan_dim() + time_embed_dim);
  for (Index h : hidden) s.widths.push_back(h);
  s.widths.push_back(plan_dim());
  s.activation = activation;
  return s;
}

void DiffusionSpec::validate() const {
  if (cond_dim < 1 || target_dim < 1) {
    throw ConfigError("diffusion spec needs cond and target dims");
  }
  if (time_embed_dim < 2 || time_embed_dim % 2 != 0) {
    throw ConfigError("time embedding dim must be even and >= 2");
  }
  if (diffusion_steps < 1) throw ConfigError("diffusion needs >= 1 step");
}

Vec time_embedding(int step, Index dim) {
  Vec e(dim);
  const Index half = dim / 2;
  for (Index i = 0; i < half; ++i) {
    double freq =
        std::exp(-std::log(10000.0) * static_cast<double>(i) /
                 static_cast<double>(half));
    e[2 * i] = std::sin(step * freq);
    e[2 * i + 1] = std::cos(step * freq);
  }
  return e;
}

DiffusionCore DiffusionCore::create(const DiffusionSpec& spec,
                                    std::uint64_t init_seed) {
  spec.validate();
  DiffusionCore core;
  core.spec_ = spec;
  core.sched_ =
      NoiseSchedule::linear(spec.diffusion_steps, spec.beta_min, spec.beta_max);
  core.denoiser_spec_ = spec.denoiser_spec();
  numerics::ParamVector::Builder b;
  core.denoiser_ = numerics::register_mlp(b, "den", core.denoiser_spec_);
  core.params_ = b.build();
  Rng rng(init_seed);
  numerics::init_mlp(core.params_, core.denoiser_, rng);
  return core;
}

Vec DiffusionCore::predict_noise(const Vec& plan, int step) const {
  if (plan.size() != spec_.plan_dim()) {
    throw ConfigError("denoiser input size mismatch");
  }
  Vec input(spec_.plan_dim() + spec_.time_embed_dim);
  input << plan, time_embedding(step, spec_.time_embed_dim);
  return numerics::mlp_forward(denoiser_spec_, denoiser_, params_, input);
}

void DiffusionCore::add_noise_loss(Tape& tape, const Vec& cond,
                                   const Vec& noisy_target, int step,
                                   const Vec& noise, double weight) const {
  Vec input(spec_.plan_dim() + spec_.time_embed_dim);
  input << cond, noisy_target, time_embedding(step, spec_.time_embed_dim);
  Tape::NodeId x = tape.constant(std::move(input));
  Tape::NodeId out = numerics::mlp_forward(tape, denoiser_spec_, denoiser_, x);
  Tape::NodeId pred = tape.slice(out, spec_.cond_dim, spec_.target_dim);
  Tape::NodeId residual = tape.sub(pred, tape.constant(noise));
  tape.add_squared_norm(residual, weight);
}

Vec DiffusionCore::sample_target(const Vec& cond, Rng& rng) const {
  if (cond.size() != spec_.cond_dim) {
    throw ConfigError("sample_target conditioning size mismatch");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec target(spec_.target_dim);
  for (Index i = 0; i < target.size(); ++i) target[i] = gauss(rng);

  Vec plan(spec_.plan_dim());
  for (int t = sched_.steps; t >= 1; --t) {
    plan << cond, target;  // re-impose the conditioning block every step
    Vec eps = predict_noise(plan, t).tail(spec_.target_dim);
    double a = sched_.alpha(t);
    double ab = sched_.alpha_bar(t);
    Vec mean = (target - (sched_.beta(t) / std::sqrt(1.0 - ab)) * eps) /
               std::sqrt(a);
    if (t > 1) {
      double ab_prev = sched_.alpha_bar(t - 1);
      double var = (1.0 - ab_prev) / (1.0 - ab) * sched_.beta(t);
      double sd = std::sqrt(var);
      for (Index i = 0; i < target.size(); ++i) {
        target[i] = mean[i] + sd * gauss(rng);
      }
    } else {
      target = mean;
    }
  }
  return target;
}

TrainLog train_diffusion(DiffusionCore& core,
                         const std::vector<std::pair<Vec, Vec>>& samples,
                         const TrainSettings& ts) {
  if (samples.empty()) throw ConfigError("diffusion training needs samples");
  numerics::ParamVector& params = core.params();
  numerics::OptimizerState opt =
      numerics::OptimizerState::create(params.size(), ts.opt);
  Rng rng(derive_seed(ts.seed, "diffusion-train"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> step_dist(1, core.schedule().steps);

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  const int steps_per_epoch = std::max<int>(
      1, static_cast<int>((samples.size() + ts.batch - 1) / ts.batch));
  int epochs = std::max(
      ts.epochs, (ts.min_steps + steps_per_epoch - 1) / steps_per_epoch);

  const Index target_dim = core.spec().target_dim;
  Tape tape(params);
  Vec grad(params.size());
  TrainLog log;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (int step = 0; step < steps_per_epoch; ++step) {
      tape.reset();
      int in_batch = 0;
      for (int b = 0; b < ts.batch; ++b) {
        std::size_t idx = static_cast<std::size_t>(step) * ts.batch + b;
        if (idx >= order.size()) break;
        const auto& [cond, target] = samples[order[idx]];
        int tau = step_dist(rng);
        Vec noise(target_dim);
        for (Index i = 0; i < target_dim; ++i) noise[i] = gauss(rng);
        Vec noisy = q_sample(core.schedule(), target, tau, noise);
        core.add_noise_loss(tape, cond, noisy, tau, noise, 1.0);
        ++in_batch;
      }
      if (in_batch == 0) continue;
      // Rescale to a per-element mean after the fact would need the terms up
      // front; instead fold the normalization into one divisor here.
      double loss = tape.loss() / (in_batch * target_dim);
      if (!std::isfinite(loss)) {
        throw NumericError("diffusion training diverged at epoch " +
                           std::to_string(epoch));
      }
      grad.setZero();
      tape.backward(grad);
      grad /= static_cast<double>(in_batch) * static_cast<double>(target_dim);
      opt_step(opt, params, grad);
      epoch_loss += loss;
    }
    log.epoch_loss.push_back(epoch_loss / steps_per_epoch);
  }
  return log;
}

}  // namespace koap::planner

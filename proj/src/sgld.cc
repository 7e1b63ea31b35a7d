// Copyright 2026 The DP-SGLD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsgld/sgld.h"

#include <cmath>

#include "absl/strings/str_format.h"

namespace dpsgld {
namespace {

// Pre-projection iterates beyond this multiple of R mean the constants or
// step sizes are wrong; projecting them would hide the problem.
constexpr double kDivergenceFactor = 1e6;

enum class InitPolicy { kGaussian, kZero };

struct UpdateOptions {
  double noise_variance;
  InitPolicy init;
  std::optional<ClipOptions> clip;
};

absl::StatusOr<Trajectory> Run(const TrainConfig& config, const Dataset& data,
                               const Loss& loss,
                               const LossConstants& constants,
                               const UpdateOptions& opts) {
  const int d = loss.Dimension();
  CounterEngine batch_engine(config.seed.value,
                             static_cast<uint64_t>(Stream::kBatch));
  GaussianSource init_source(config.seed.value, Stream::kInit);
  GaussianSource noise_source(config.seed.value, Stream::kNoise);

  Trajectory traj;
  traj.seed = config.seed.value;
  Vector theta = opts.init == InitPolicy::kGaussian
                     ? InitTheta(opts.noise_variance,
                                 constants.strong_convexity, config.ball, d,
                                 init_source)
                     : Vector::Zero(d);

  auto record = [&](int64_t k) {
    if (config.snapshot_stride <= 0) return;
    if (k % config.snapshot_stride != 0 && k != config.iterations) return;
    traj.snapshots.push_back({k, theta});
    if (config.record_loss) traj.losses.push_back(loss.FullValue(theta, data));
  };
  record(0);

  Vector grad(d);
  Vector example(d);
  Vector noise(d);
  const double limit = kDivergenceFactor * config.ball.radius();
  for (int64_t k = 0; k < config.iterations; ++k) {
    auto eta = config.schedule.Eta(k);
    if (!eta.ok()) return eta.status();
    auto batch = SampleBatch(data.size(), config.batch_size, batch_engine);
    if (!batch.ok()) return batch.status();

    grad.setZero();
    const double w = 1.0 / static_cast<double>(batch->size());
    // One accumulation path for both methods, so that inactive clipping
    // reproduces DP-SGLD bit for bit.
    for (int i : *batch) {
      example.setZero();
      loss.AddExampleGradient(theta, data, i, 1.0, example);
      double scale = 1.0;
      if (opts.clip.has_value()) {
        const double norm = example.norm();
        if (norm > opts.clip->clip_norm) scale = opts.clip->clip_norm / norm;
      }
      grad += (w * scale) * example;
    }

    noise_source.Fill(noise);
    theta -= *eta * grad;
    theta += std::sqrt(2.0 * *eta * opts.noise_variance) * noise;

    const double norm = theta.norm();
    if (!std::isfinite(norm) || norm > limit) {
      return absl::InternalError(absl::StrFormat(
          "iterate diverged at iteration %d (norm %g, radius %g)", k + 1,
          norm, config.ball.radius()));
    }
    if (!opts.clip.has_value() || opts.clip->project) {
      ProjectInPlace(config.ball, theta);
    }
    record(k + 1);
  }
  traj.theta_final = std::move(theta);
  return traj;
}

}  // namespace

int64_t IterationsForEpochs(int64_t epochs, int n, int m) {
  return epochs * ((static_cast<int64_t>(n) + m - 1) / m);
}

Vector InitTheta(double noise_variance, double strong_convexity,
                 const L2Ball& ball, int dimension, GaussianSource& source) {
  Vector theta(dimension);
  source.Fill(theta);
  theta *= std::sqrt(2.0 * noise_variance / strong_convexity);
  ProjectInPlace(ball, theta);
  return theta;
}

absl::Status ValidateTrainConfig(const TrainConfig& config,
                                 const Dataset& data,
                                 const LossConstants& constants,
                                 bool require_noise) {
  if (config.batch_size < 1 || config.batch_size > data.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "batch size %d outside [1, %d]", config.batch_size, data.size()));
  }
  if (config.iterations < 0) {
    return absl::InvalidArgumentError("iteration count must be >= 0");
  }
  if (!std::isfinite(config.noise_variance) || config.noise_variance < 0 ||
      (require_noise && config.noise_variance <= 0)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "invalid noise variance %g", config.noise_variance));
  }
  if (auto s = constants.Validate(); !s.ok()) return s;
  return config.schedule.CheckCap(config.mode, constants.smoothness,
                                  config.iterations);
}

absl::StatusOr<Trajectory> DpSgldTrain(const TrainConfig& config,
                                       const Dataset& data, const Loss& loss,
                                       const LossConstants& constants) {
  if (auto s = loss.Validate(data); !s.ok()) return s;
  // sigma^2 = 0 is allowed here: it is the deterministic limit used by the
  // utility oracles and by SgdTrain.
  if (auto s = ValidateTrainConfig(config, data, constants, false); !s.ok()) {
    return s;
  }
  return Run(config, data, loss, constants,
             {config.noise_variance, InitPolicy::kGaussian, std::nullopt});
}

absl::StatusOr<Trajectory> DpSgdTrain(const TrainConfig& config,
                                      const Dataset& data, const Loss& loss,
                                      const LossConstants& constants,
                                      const ClipOptions& clip) {
  if (!(clip.clip_norm > 0) || !std::isfinite(clip.clip_norm)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("clip norm must be > 0, got %g", clip.clip_norm));
  }
  if (auto s = loss.Validate(data); !s.ok()) return s;
  if (auto s = ValidateTrainConfig(config, data, constants, false); !s.ok()) {
    return s;
  }
  return Run(config, data, loss, constants,
             {config.noise_variance, InitPolicy::kGaussian, clip});
}

absl::StatusOr<Trajectory> SgdTrain(const TrainConfig& config,
                                    const Dataset& data, const Loss& loss,
                                    const LossConstants& constants) {
  if (auto s = loss.Validate(data); !s.ok()) return s;
  if (auto s = ValidateTrainConfig(config, data, constants, false); !s.ok()) {
    return s;
  }
  return Run(config, data, loss, constants,
             {0.0, InitPolicy::kZero, std::nullopt});
}

}  // namespace dpsgld

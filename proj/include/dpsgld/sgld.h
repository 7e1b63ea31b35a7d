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

// Optimizers: DP-SGLD (noisy projected minibatch gradient descent), a
// per-example-clipped DP-SGD baseline, and non-private SGD.
//
// Every run is a deterministic function of (config, data, loss, seed). The
// seed feeds three independent substreams: batch sampling, initialization
// and per-step noise. Noise is drawn at every step even when the noise
// variance is zero, so runs that differ only in sigma^2 see the same z_k.

#ifndef DPSGLD_SGLD_H_
#define DPSGLD_SGLD_H_

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "dpsgld/losses.h"
#include "dpsgld/rng.h"
#include "dpsgld/types.h"

namespace dpsgld {

struct TrainConfig {
  int batch_size = 1;
  int64_t iterations = 0;
  double noise_variance = 0;  // sigma^2
  StepSchedule schedule;
  L2Ball ball;
  RunSeed seed;
  StepCap mode = StepCap::kPrivacy;
  // Keep theta_k for k % snapshot_stride == 0 (and the final iterate).
  // 0 disables snapshots.
  int64_t snapshot_stride = 0;
  // Also record L_D(theta_k) at each snapshot.
  bool record_loss = false;
};

struct Snapshot {
  int64_t k;
  Vector theta;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  std::vector<double> losses;  // parallel to snapshots when recorded
  Vector theta_final;
  uint64_t seed = 0;
};

// One epoch is ceil(n / m) iterations.
int64_t IterationsForEpochs(int64_t epochs, int n, int m);

// theta_0 ~ Proj_C(N(0, (2 sigma^2 / lambda) I_d)).
Vector InitTheta(double noise_variance, double strong_convexity,
                 const L2Ball& ball, int dimension, GaussianSource& source);

// Checks batch size, iteration count, sigma^2 and the schedule's step cap
// for the given smoothness constant.
absl::Status ValidateTrainConfig(const TrainConfig& config,
                                 const Dataset& data,
                                 const LossConstants& constants,
                                 bool require_noise);

// Algorithm: for k = 0..K-1, sample a batch B_k of size m without
// replacement, g = mean gradient on B_k at theta_k, then
// theta_{k+1} = Proj_C(theta_k - eta_k g + sqrt(2 eta_k sigma^2) z_k).
absl::StatusOr<Trajectory> DpSgldTrain(const TrainConfig& config,
                                       const Dataset& data, const Loss& loss,
                                       const LossConstants& constants);

struct ClipOptions {
  double clip_norm = 1.0;
  bool project = true;
};

// Same update law as DpSgldTrain except every per-example gradient is
// rescaled to norm <= clip_norm before averaging.
absl::StatusOr<Trajectory> DpSgdTrain(const TrainConfig& config,
                                      const Dataset& data, const Loss& loss,
                                      const LossConstants& constants,
                                      const ClipOptions& clip);

// Non-private projected SGD: sigma^2 = 0 and theta_0 = 0.
absl::StatusOr<Trajectory> SgdTrain(const TrainConfig& config,
                                    const Dataset& data, const Loss& loss,
                                    const LossConstants& constants);

}  // namespace dpsgld

#endif  // DPSGLD_SGLD_H_

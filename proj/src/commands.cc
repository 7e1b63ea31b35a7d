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

#include "dpsgld/commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <limits>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "dpsgld/blobs.h"
#include "dpsgld/sgld.h"

namespace dpsgld {
namespace {

using nlohmann::json;

constexpr int kCurvePoints = 200;

std::string Resolve(const std::string& base_dir, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

absl::StatusOr<LoadedDataset> LoadSource(const RunConfig& config,
                                         const DatasetSource& source,
                                         const std::string& base_dir,
                                         int num_classes) {
  if (source.blobs.has_value()) {
    auto loaded = GenerateBlobs(*source.blobs);
    if (!loaded.ok()) return loaded.status();
    if (config.loss == "quadratic") {
      // Mean estimation ignores labels.
      auto data = Dataset::Create(loaded->data.features(), {},
                                  loaded->data.norm_bound(), 0);
      if (!data.ok()) return data.status();
      return LoadedDataset{*std::move(data), loaded->rescaled_rows,
                           loaded->feature_names};
    }
    return loaded;
  }
  CsvOptions options;
  options.label_column = config.label_column;
  options.norm_bound = config.norm_bound;
  options.num_classes = num_classes;
  options.unlabeled = config.loss == "quadratic";
  return LoadCsv(Resolve(base_dir, source.path), options);
}

std::string UtcTimestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string Cell(double value) { return FormatDouble(value); }
std::string Cell(int64_t value) { return absl::StrCat(value); }
std::string Cell(const std::optional<double>& value) {
  return value ? FormatDouble(*value) : "";
}

double Square(double x) { return x * x; }

absl::StatusOr<StepSchedule> MakeSchedule(const ScheduleSpec& spec,
                                          const LossConstants& c) {
  if (spec.kind == "decreasing") {
    return StepSchedule::Decreasing(c.smoothness, c.strong_convexity);
  }
  if (spec.kind == "explicit") return StepSchedule::Explicit(spec.etas);
  return StepSchedule::Constant(spec.eta.value_or(1.0 / (2.0 * c.smoothness)));
}

std::vector<int64_t> CurveGrid(int64_t k_max) {
  std::vector<int64_t> ks;
  if (k_max <= kCurvePoints) {
    for (int64_t k = 0; k <= k_max; ++k) ks.push_back(k);
    return ks;
  }
  for (int i = 0; i <= kCurvePoints; ++i) {
    ks.push_back(static_cast<int64_t>(
        std::llround(static_cast<double>(k_max) * i / kCurvePoints)));
  }
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  return ks;
}

// Step sums S_k for every k in `ks` (ascending), by one pass of summation.
absl::StatusOr<std::vector<double>> StepSums(const StepSchedule& schedule,
                                             const std::vector<int64_t>& ks) {
  std::vector<double> sums;
  sums.reserve(ks.size());
  if (schedule.is_constant()) {
    for (int64_t k : ks) {
      auto s = schedule.Sum(k);
      if (!s.ok()) return s.status();
      sums.push_back(*s);
    }
    return sums;
  }
  double sum = 0;
  int64_t done = 0;
  for (int64_t k : ks) {
    for (; done < k; ++done) {
      auto eta = schedule.Eta(done);
      if (!eta.ok()) return eta.status();
      sum += *eta;
    }
    sums.push_back(sum);
  }
  return sums;
}

// How a run is accounted for. Every epsilon is a function of (alpha, S_K).
struct Accounting {
  std::string kind;  // langevin | composition | none
  PrivacyParams params;  // composition: lipschitz holds the clip norm
  double delta = 0;
  std::vector<double> grid;

  double Rdp(double alpha, double step_sum) const {
    PrivacyParams q = params;
    q.alpha = alpha;
    if (kind == "langevin") return RdpFromStepSum(q, step_sum);
    return alpha * Square(q.lipschitz) * step_sum /
           (Square(static_cast<double>(q.n)) * q.noise_variance);
  }

  AlphaChoice Best(double step_sum) const {
    AlphaChoice best{0, 0, std::numeric_limits<double>::infinity()};
    for (double alpha : grid) {
      const double rdp = Rdp(alpha, step_sum);
      const double dp = rdp + std::log(1.0 / delta) / (alpha - 1.0);
      if (dp < best.eps_dp) best = {alpha, rdp, dp};
    }
    return best;
  }
};

json PrivacyJson(const Accounting& acc, double step_sum) {
  if (acc.kind == "none") return json{{"accounting", "none"}};
  const AlphaChoice best = acc.Best(step_sum);
  json curve = json::array();
  for (double alpha : acc.grid) {
    curve.push_back({{"alpha", alpha}, {"eps_rdp", acc.Rdp(alpha, step_sum)}});
  }
  PrivacyParams at_best = acc.params;
  at_best.alpha = best.alpha;
  json out{{"accounting", acc.kind},
           {"delta", acc.delta},
           {"alpha", best.alpha},
           {"eps_rdp", best.eps_rdp},
           {"eps_dp", best.eps_dp},
           {"rdp_curve", curve}};
  if (acc.kind == "langevin") {
    out["composition_baseline_rdp"] =
        CompositionBaseline(best.alpha, at_best.lipschitz, at_best.n,
                            at_best.noise_variance, step_sum, 1);
    out["asymptote_rdp"] = RdpAsymptote(at_best);
  }
  return out;
}

struct Evaluation {
  double train_loss;
  double train_accuracy;
  std::optional<double> test_loss;
  std::optional<double> test_accuracy;
};

Evaluation Evaluate(const Loss& loss, const Vector& theta, const Splits& s) {
  const auto* logistic = dynamic_cast<const LogisticLoss*>(&loss);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Evaluation e{loss.FullValue(theta, s.train.data),
               logistic ? logistic->Accuracy(theta, s.train.data) : nan,
               std::nullopt, std::nullopt};
  if (s.test.has_value()) {
    e.test_loss = loss.FullValue(theta, s.test->data);
    if (logistic) e.test_accuracy = logistic->Accuracy(theta, s.test->data);
  }
  return e;
}

json OptionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json NumberOrNull(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

absl::StatusOr<Splits> LoadSplits(const RunConfig& config,
                                  const std::string& base_dir) {
  auto train = LoadSource(config, config.dataset, base_dir, 0);
  if (!train.ok()) return train.status();
  const int classes = train->data.num_classes();
  Splits splits{*std::move(train), std::nullopt};
  if (config.test_dataset.has_value()) {
    auto test = LoadSource(config, *config.test_dataset, base_dir, classes);
    if (!test.ok()) return test.status();
    splits.test = *std::move(test);
  } else if (config.dataset.blobs.has_value()) {
    DatasetSource held_out = config.dataset;
    held_out.blobs->seed += 1;
    auto test = LoadSource(config, held_out, base_dir, classes);
    if (!test.ok()) return test.status();
    splits.test = *std::move(test);
  }
  if (splits.test.has_value() &&
      splits.test->data.num_features() != splits.train.data.num_features()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "test split has %d features, train split has %d",
        splits.test->data.num_features(), splits.train.data.num_features()));
  }
  if (splits.test.has_value() &&
      splits.test->data.num_classes() != classes) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "test split has %d classes, train split has %d",
        splits.test->data.num_classes(), classes));
  }
  return splits;
}

absl::StatusOr<SgdCalibration> CalibrateDpSgd(double epsilon, double delta,
                                              double clip_norm, int64_t n,
                                              double step_sum) {
  if (!(epsilon > 0) || !(delta > 0 && delta < 1) || !(clip_norm > 0) ||
      n < 1 || !(step_sum > 0)) {
    return absl::InvalidArgumentError(
        "DP-SGD calibration needs eps > 0, delta in (0, 1), C > 0, n >= 1 and "
        "a positive step sum");
  }
  // eps_dp(alpha) = alpha a + log(1/delta)/(alpha - 1) is minimized at
  // alpha - 1 = sqrt(log(1/delta)/a) with value a + 2 sqrt(a log(1/delta)).
  const double l = std::log(1.0 / delta);
  // Shrunk slightly so rounding cannot push the result above epsilon.
  const double a =
      Square(std::sqrt(l + epsilon) - std::sqrt(l)) * (1.0 - 1e-12);
  SgdCalibration out;
  out.noise_variance = Square(clip_norm) * step_sum /
                       (Square(static_cast<double>(n)) * a);
  out.alpha = 1.0 + std::sqrt(l / a);
  return out;
}

absl::StatusOr<Problem> BuildProblem(const RunConfig& config,
                                     const Dataset& data) {
  std::unique_ptr<Loss> loss;
  double radius = 0;
  if (config.loss == "logistic") {
    if (data.num_classes() < 2) {
      return absl::InvalidArgumentError("logistic loss needs labeled data");
    }
    auto l = LogisticLoss::Create(data.num_classes(), data.num_features(),
                                  config.reg);
    if (!l.ok()) return l.status();
    loss = std::make_unique<LogisticLoss>(*std::move(l));
    if (config.radius) {
      radius = *config.radius;
    } else {
      auto r = DefaultLogisticRadius(data.num_classes(), 2.0 * config.reg);
      if (!r.ok()) return r.status();
      radius = *r;
    }
  } else {
    auto l = QuadraticLoss::Create(data.num_features());
    if (!l.ok()) return l.status();
    loss = std::make_unique<QuadraticLoss>(*std::move(l));
    radius = config.radius.value_or(data.norm_bound());
  }
  auto ball = L2Ball::Create(radius);
  if (!ball.ok()) return ball.status();
  auto constants = config.loss == "logistic"
                       ? LogisticConstants(data, config.reg, *ball)
                       : QuadraticConstants(data, *ball);
  if (!constants.ok()) return constants.status();
  return Problem{std::move(loss), *ball, *constants};
}

absl::StatusOr<TrainOutcome> RunTrain(const RunConfig& config,
                                      const Splits& splits) {
  const Dataset& data = splits.train.data;
  const int n = data.size();

  auto problem = BuildProblem(config, data);
  if (!problem.ok()) return problem.status();
  const Loss* loss = problem->loss.get();
  const LossConstants* constants = &problem->constants;
  const double radius = problem->ball.radius();
  const L2Ball* ball = &problem->ball;
  const int d = loss->Dimension();

  auto schedule = MakeSchedule(config.schedule, *constants);
  if (!schedule.ok()) return schedule.status();

  // Iteration count and noise.
  std::optional<Calibration> calibration;
  if (config.target) {
    auto cal = CalibrateDp(config.target->epsilon, config.target->delta,
                           *constants, n, d);
    if (!cal.ok()) return cal.status();
    calibration = *cal;
  }
  int64_t iterations = 0;
  if (config.iterations) {
    iterations = *config.iterations;
  } else if (config.epochs) {
    iterations = IterationsForEpochs(*config.epochs, n, config.batch_size);
  } else {
    iterations = calibration->iterations;
  }
  if (config.schedule.kind == "explicit" &&
      iterations > static_cast<int64_t>(config.schedule.etas.size())) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "explicit schedule has %d steps but the run needs %d",
        config.schedule.etas.size(), iterations));
  }
  auto step_sum = schedule->Sum(iterations);
  if (!step_sum.ok()) return step_sum.status();

  const double delta = config.target ? config.target->delta : config.delta;
  Accounting acc;
  acc.delta = delta;
  double noise_variance = config.noise_variance.value_or(0.0);
  double clip_norm = config.clip_norm.value_or(constants->lipschitz);
  std::optional<double> target_eps;
  if (config.target) target_eps = config.target->epsilon;
  acc.grid = DefaultAlphaGrid(target_eps, delta);

  if (config.method == "sgld") {
    if (calibration) noise_variance = calibration->noise_variance;
    acc.kind = "langevin";
    acc.params = PrivacyParams::FromConstants(*constants, 2.0, n,
                                              noise_variance, d);
    if (auto s = acc.params.Validate(); !s.ok()) return s;
    if (auto s = schedule->CheckCap(StepCap::kPrivacy,
                                    constants->smoothness, iterations);
        !s.ok()) {
      return s;
    }
  } else if (config.method == "sgd-dp") {
    if (config.target) {
      auto cal = CalibrateDpSgd(config.target->epsilon, config.target->delta,
                                clip_norm, n, *step_sum);
      if (!cal.ok()) return cal.status();
      noise_variance = cal->noise_variance;
      acc.grid.push_back(cal->alpha);
      std::sort(acc.grid.begin(), acc.grid.end());
    }
    acc.kind = "composition";
    acc.params = PrivacyParams::FromConstants(*constants, 2.0, n,
                                              noise_variance, d);
    acc.params.lipschitz = clip_norm;
    if (!(noise_variance > 0)) {
      return absl::InvalidArgumentError("DP-SGD needs noise_variance > 0");
    }
  } else {
    acc.kind = "none";
    noise_variance = 0.0;
  }

  TrainConfig tc{.batch_size = config.batch_size,
                 .iterations = iterations,
                 .noise_variance = noise_variance,
                 .schedule = *schedule,
                 .ball = *ball,
                 .seed = {config.seed},
                 .mode = config.method == "sgld" ? StepCap::kPrivacy
                                                 : StepCap::kNone,
                 .snapshot_stride = config.snapshot_stride};
  absl::StatusOr<Trajectory> traj =
      config.method == "sgld"
          ? DpSgldTrain(tc, data, *loss, *constants)
      : config.method == "sgd-dp"
          ? DpSgdTrain(tc, data, *loss, *constants, ClipOptions{clip_norm, true})
          : SgdTrain(tc, data, *loss, *constants);
  if (!traj.ok()) return traj.status();

  TrainOutcome out;
  out.theta_final = traj->theta_final;
  out.constants = *constants;
  const Evaluation final_eval = Evaluate(*loss, traj->theta_final, splits);
  out.train_accuracy = final_eval.train_accuracy;
  out.test_accuracy = final_eval.test_accuracy;
  out.majority_rate = data.num_classes() > 0
                          ? MajorityRate(splits.test ? splits.test->data : data)
                          : std::numeric_limits<double>::quiet_NaN();

  // metrics.csv: one row per evaluation point.
  out.metrics = CsvTable({"k", "train_loss", "train_accuracy", "test_loss",
                          "test_accuracy"});
  std::vector<Snapshot> points = traj->snapshots;
  if (points.empty()) points.push_back({iterations, traj->theta_final});
  for (const auto& snap : points) {
    const Evaluation e = Evaluate(*loss, snap.theta, splits);
    out.metrics.AddRow({Cell(snap.k), Cell(e.train_loss),
                        std::isnan(e.train_accuracy) ? ""
                                                     : Cell(e.train_accuracy),
                        Cell(e.test_loss), Cell(e.test_accuracy)});
  }

  // epsilon_curve.csv: best-alpha epsilon along the run.
  out.epsilon_curve = CsvTable(
      {"k", "schedule_sum", "alpha", "delta", "eps_rdp", "eps_dp"});
  const std::vector<int64_t> ks = CurveGrid(iterations);
  auto sums = StepSums(*schedule, ks);
  if (!sums.ok()) return sums.status();
  for (size_t i = 0; i < ks.size(); ++i) {
    if (acc.kind == "none") {
      out.epsilon_curve.AddRow({Cell(ks[i]), Cell((*sums)[i]), "", "", "", ""});
      continue;
    }
    const AlphaChoice best = acc.Best((*sums)[i]);
    out.epsilon_curve.AddRow({Cell(ks[i]), Cell((*sums)[i]), Cell(best.alpha),
                              Cell(delta), Cell(best.eps_rdp),
                              Cell(best.eps_dp)});
  }

  json privacy = PrivacyJson(acc, *step_sum);
  if (acc.kind != "none") out.eps_dp = privacy["eps_dp"].get<double>();

  json constants_json{{"lipschitz", constants->lipschitz},
                      {"strong_convexity", constants->strong_convexity},
                      {"smoothness", constants->smoothness},
                      {"radius", radius},
                      {"norm_bound", data.norm_bound()},
                      {"lsi_constant",
                       noise_variance > 0
                           ? json(constants->strong_convexity /
                                  (2.0 * noise_variance))
                           : json(nullptr)}};
  if (config.method == "sgd-dp") constants_json["clip_norm"] = clip_norm;

  json training{{"method", config.method},
                {"loss", loss->Name()},
                {"dimension", d},
                {"iterations", iterations},
                {"batch_size", config.batch_size},
                {"noise_variance", noise_variance},
                {"schedule", schedule->DebugString()},
                {"schedule_sum", *step_sum}};
  if (calibration) {
    training["calibration"] = {
        {"epsilon", config.target->epsilon},
        {"delta", config.target->delta},
        {"noise_variance", calibration->noise_variance},
        {"iterations", calibration->iterations},
        {"alpha", calibration->alpha},
        {"eta", calibration->eta}};
  }

  json dataset{{"n", n},
               {"num_features", data.num_features()},
               {"num_classes", data.num_classes()},
               {"rescaled_rows", splits.train.rescaled_rows},
               {"majority_rate", NumberOrNull(out.majority_rate)}};
  if (splits.test) {
    dataset["test_n"] = splits.test->data.size();
    dataset["test_rescaled_rows"] = splits.test->rescaled_rows;
  }

  json theta = json::array();
  for (Eigen::Index i = 0; i < traj->theta_final.size(); ++i) {
    theta.push_back(traj->theta_final[i]);
  }

  out.report = json{
      {"schema_version", kReportSchemaVersion},
      {"command", "train"},
      {"provenance",
       {{"config_hash", config.HashHex()},
        {"seed", config.seed},
        {"tool_version", DPSGLD_VERSION},
        {"timestamp", UtcTimestamp()}}},
      {"config", config.ToJson()},
      {"dataset", dataset},
      {"constants", constants_json},
      {"training", training},
      {"metrics",
       {{"train_loss", final_eval.train_loss},
        {"train_accuracy", NumberOrNull(final_eval.train_accuracy)},
        {"test_loss", OptionalJson(final_eval.test_loss)},
        {"test_accuracy", OptionalJson(final_eval.test_accuracy)}}},
      {"privacy", privacy},
      {"theta_final", theta}};
  return out;
}

absl::Status WriteTrainOutputs(const TrainOutcome& outcome,
                               const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::UnavailableError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  const std::filesystem::path base(dir);
  if (auto s = WriteFile((base / "report.json").string(),
                         outcome.report.dump(2) + "\n");
      !s.ok()) {
    return s;
  }
  if (auto s = outcome.metrics.Write((base / "metrics.csv").string());
      !s.ok()) {
    return s;
  }
  return outcome.epsilon_curve.Write((base / "epsilon_curve.csv").string());
}

json StripVolatile(json report) {
  if (report.contains("provenance")) report["provenance"].erase("timestamp");
  return report;
}

absl::StatusOr<CsvTable> AccountTable(const AccountSpec& spec) {
  const PrivacyParams& p = spec.params;
  if (auto s = p.Validate(); !s.ok()) return s;
  if (spec.k_max < 0 || spec.k_step < 1) {
    return absl::InvalidArgumentError("need k_max >= 0 and k_step >= 1");
  }
  absl::StatusOr<StepSchedule> schedule =
      spec.schedule == "decreasing"
          ? StepSchedule::Decreasing(p.smoothness, p.strong_convexity)
      : spec.schedule == "constant"
          ? StepSchedule::Constant(
                spec.eta.value_or(1.0 / (2.0 * p.smoothness)))
          : absl::InvalidArgumentError(absl::StrCat(
                "unknown schedule '", spec.schedule,
                "' (expected constant or decreasing)"));
  if (!schedule.ok()) return schedule.status();
  if (auto s = schedule->CheckCap(StepCap::kPrivacy, p.smoothness, 1);
      !s.ok()) {
    return s;
  }
  std::vector<int64_t> ks;
  for (int64_t k = 0; k <= spec.k_max; k += spec.k_step) ks.push_back(k);
  if (ks.back() != spec.k_max) ks.push_back(spec.k_max);
  auto sums = StepSums(*schedule, ks);
  if (!sums.ok()) return sums.status();

  CsvTable table({"k", "schedule_sum", "alpha", "delta", "rdp_general",
                  "rdp_constant", "rdp_decreasing", "baseline", "eps_dp"});
  for (size_t i = 0; i < ks.size(); ++i) {
    const int64_t k = ks[i];
    const double sum = (*sums)[i];
    const double general = RdpFromStepSum(p, sum);
    std::optional<double> constant, decreasing;
    if (schedule->is_constant()) {
      auto c = RdpConstant(p, *schedule->Eta(0), k);
      if (!c.ok()) return c.status();
      constant = *c;
    } else {
      auto c = RdpDecreasing(p, k);
      if (!c.ok()) return c.status();
      decreasing = *c;
    }
    const double baseline = CompositionBaseline(
        p.alpha, p.lipschitz, p.n, p.noise_variance, sum, 1);
    auto dp = ToDp(general, p.alpha, spec.delta);
    if (!dp.ok()) return dp.status();
    table.AddRow({Cell(k), Cell(sum), Cell(p.alpha), Cell(spec.delta),
                  Cell(general), Cell(constant), Cell(decreasing),
                  Cell(baseline), Cell(*dp)});
  }
  return table;
}

json AccountJson(const AccountSpec& spec, const CsvTable& table) {
  const PrivacyParams& p = spec.params;
  json rows = json::array();
  for (const auto& row : table.rows()) {
    json r;
    for (size_t j = 0; j < table.columns().size(); ++j) {
      const std::string& cell = row[j];
      r[table.columns()[j]] =
          cell.empty() ? json(nullptr) : json(std::stod(cell));
    }
    r["k"] = std::stoll(row[0]);
    rows.push_back(r);
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"command", "account"},
              {"params",
               {{"alpha", p.alpha},
                {"lipschitz", p.lipschitz},
                {"strong_convexity", p.strong_convexity},
                {"smoothness", p.smoothness},
                {"n", p.n},
                {"noise_variance", p.noise_variance},
                {"delta", spec.delta},
                {"schedule", spec.schedule},
                {"asymptote_rdp", RdpAsymptote(p)}}},
              {"columns", table.columns()},
              {"rows", rows}};
}

absl::StatusOr<std::vector<CalibrateRow>> RunCalibrate(
    const CalibrateSpec& spec) {
  if (spec.delta.has_value() == spec.alpha.has_value()) {
    return absl::InvalidArgumentError(
        "give exactly one of delta (for an (eps, delta) target) or alpha "
        "(for an (alpha, eps) RDP target)");
  }
  absl::StatusOr<Calibration> fixed =
      spec.delta ? CalibrateDp(spec.epsilon, *spec.delta, spec.constants,
                               spec.n, spec.dimension)
                 : CalibrateRdp(spec.epsilon, *spec.alpha, spec.constants,
                                spec.n, spec.dimension);
  if (!fixed.ok()) return fixed.status();
  // The decreasing variant targets the same RDP budget at the same order.
  const double rdp_budget =
      spec.delta ? spec.epsilon / 2.0 : spec.epsilon;
  auto decreasing = CalibrateDecreasing(rdp_budget, fixed->alpha,
                                        spec.constants, spec.n,
                                        spec.dimension);
  if (!decreasing.ok()) return decreasing.status();

  std::vector<CalibrateRow> rows;
  for (const auto& [variant, cal] :
       {std::pair<std::string, Calibration>{"fixed", *fixed},
        {"decreasing", *decreasing}}) {
    const PrivacyParams p = PrivacyParams::FromConstants(
        spec.constants, cal.alpha, spec.n, cal.noise_variance, spec.dimension);
    auto rdp = variant == "fixed" ? RdpConstant(p, cal.eta, cal.iterations)
                                  : RdpDecreasing(p, cal.iterations);
    if (!rdp.ok()) return rdp.status();
    CalibrateRow row{variant, cal, *rdp, std::nullopt};
    if (spec.delta) {
      auto dp = ToDp(*rdp, cal.alpha, *spec.delta);
      if (!dp.ok()) return dp.status();
      row.eps_dp = *dp;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string FormatCalibrate(const CalibrateSpec& spec,
                            const std::vector<CalibrateRow>& rows) {
  std::string out = absl::StrFormat(
      "target eps=%g %s  L=%g lambda=%g beta=%g n=%d d=%d\n", spec.epsilon,
      spec.delta ? absl::StrFormat("delta=%g", *spec.delta)
                 : absl::StrFormat("alpha=%g", *spec.alpha),
      spec.constants.lipschitz, spec.constants.strong_convexity,
      spec.constants.smoothness, spec.n, spec.dimension);
  out += absl::StrFormat("%-12s %14s %14s %10s %12s %12s %12s\n", "variant",
                         "sigma2", "K", "alpha", "eta0", "eps_rdp", "eps_dp");
  for (const auto& r : rows) {
    out += absl::StrFormat(
        "%-12s %14.6g %14d %10.6g %12.6g %12.6g %12s\n", r.variant,
        r.calibration.noise_variance, r.calibration.iterations,
        r.calibration.alpha, r.calibration.eta, r.eps_rdp,
        r.eps_dp ? absl::StrFormat("%.6g", *r.eps_dp) : "-");
  }
  return out;
}

json CalibrateJson(const CalibrateSpec& spec,
                   const std::vector<CalibrateRow>& rows) {
  json variants = json::array();
  for (const auto& r : rows) {
    variants.push_back({{"variant", r.variant},
                        {"noise_variance", r.calibration.noise_variance},
                        {"iterations", r.calibration.iterations},
                        {"alpha", r.calibration.alpha},
                        {"eta0", r.calibration.eta},
                        {"eps_rdp", r.eps_rdp},
                        {"eps_dp", OptionalJson(r.eps_dp)}});
  }
  return json{{"schema_version", kReportSchemaVersion},
              {"command", "calibrate"},
              {"target",
               {{"epsilon", spec.epsilon},
                {"delta", OptionalJson(spec.delta)},
                {"alpha", OptionalJson(spec.alpha)}}},
              {"constants",
               {{"lipschitz", spec.constants.lipschitz},
                {"strong_convexity", spec.constants.strong_convexity},
                {"smoothness", spec.constants.smoothness}}},
              {"n", spec.n},
              {"dimension", spec.dimension},
              {"variants", variants}};
}

absl::StatusOr<BenchSpec> ParseBenchSpec(const json& doc) {
  if (!doc.is_object()) {
    return absl::InvalidArgumentError("bench: expected a JSON object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key != "base" && key != "datasets" && key != "methods" &&
        key != "schedules" && key != "seeds") {
      return absl::InvalidArgumentError(
          absl::StrCat("bench: unknown field '", key, "'"));
    }
  }
  if (!doc.contains("base")) {
    return absl::InvalidArgumentError("bench: missing 'base' run config");
  }
  auto base = ParseRunConfig(doc.at("base"));
  if (!base.ok()) return base.status();
  BenchSpec spec;
  spec.base = *std::move(base);
  try {
    if (doc.contains("datasets")) {
      for (const auto& entry : doc.at("datasets")) {
        // Reuse the run-config parser for the dataset sources.
        json probe = doc.at("base");
        probe["dataset"] = entry.at("dataset");
        probe.erase("test_dataset");
        if (entry.contains("test_dataset")) {
          probe["test_dataset"] = entry.at("test_dataset");
        }
        auto parsed = ParseRunConfig(probe);
        if (!parsed.ok()) return parsed.status();
        spec.datasets.push_back({entry.at("name").get<std::string>(),
                                 parsed->dataset, parsed->test_dataset});
      }
      if (spec.datasets.empty()) {
        return absl::InvalidArgumentError(
            "bench: 'datasets' needs at least one entry");
      }
    }
    if (doc.contains("methods")) {
      spec.methods = doc.at("methods").get<std::vector<std::string>>();
    }
    if (doc.contains("schedules")) {
      spec.schedules = doc.at("schedules").get<std::vector<std::string>>();
    }
    spec.seeds = doc.value("seeds", spec.seeds);
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("bench: ", e.what()));
  }
  for (const auto& m : spec.methods) {
    if (m != "sgld" && m != "sgd-dp" && m != "sgd") {
      return absl::InvalidArgumentError(
          absl::StrCat("bench: unknown method '", m, "'"));
    }
  }
  for (const auto& s : spec.schedules) {
    if (s != "constant" && s != "decreasing") {
      return absl::InvalidArgumentError(
          absl::StrCat("bench: unknown schedule '", s, "'"));
    }
  }
  if (spec.methods.empty() || spec.schedules.empty() || spec.seeds < 1) {
    return absl::InvalidArgumentError(
        "bench: need at least one method, one schedule and one seed");
  }
  return spec;
}

absl::StatusOr<CsvTable> RunBench(const BenchSpec& spec,
                                  const std::string& base_dir) {
  std::vector<BenchSpec::Entry> datasets = spec.datasets;
  if (datasets.empty()) {
    const auto& src = spec.base.dataset;
    datasets.push_back({src.blobs ? "blobs" : std::filesystem::path(src.path)
                                                  .stem()
                                                  .string(),
                        src, spec.base.test_dataset});
  }
  CsvTable table({"method", "dataset", "schedule", "epochs", "iterations",
                  "epsilon", "delta", "alpha", "seeds", "test_accuracy_mean",
                  "test_accuracy_stderr", "train_accuracy_mean",
                  "majority_rate"});
  for (const auto& entry : datasets) {
    RunConfig config = spec.base;
    config.dataset = entry.dataset;
    config.test_dataset = entry.test_dataset;
    auto splits = LoadSplits(config, base_dir);
    if (!splits.ok()) return splits.status();
    for (const auto& method : spec.methods) {
      for (const auto& schedule : spec.schedules) {
        RunConfig run = config;
        run.method = method;
        if (schedule != run.schedule.kind) {
          run.schedule = ScheduleSpec{};
          run.schedule.kind = schedule;
        }
        std::vector<double> test_acc, train_acc;
        std::optional<TrainOutcome> first;
        for (int s = 0; s < spec.seeds; ++s) {
          run.seed = spec.base.seed + static_cast<uint64_t>(s);
          auto outcome = RunTrain(run, *splits);
          if (!outcome.ok()) {
            return absl::Status(
                outcome.status().code(),
                absl::StrCat(method, "/", entry.name, "/", schedule, ": ",
                             outcome.status().message()));
          }
          train_acc.push_back(outcome->train_accuracy);
          if (outcome->test_accuracy) test_acc.push_back(*outcome->test_accuracy);
          if (!first) first = *std::move(outcome);
        }
        const std::vector<double>& acc = test_acc.empty() ? train_acc : test_acc;
        double mean = 0;
        for (double a : acc) mean += a;
        mean /= static_cast<double>(acc.size());
        double var = 0;
        for (double a : acc) var += Square(a - mean);
        const double stderr_ =
            acc.size() > 1
                ? std::sqrt(var / static_cast<double>(acc.size() - 1) /
                            static_cast<double>(acc.size()))
                : 0.0;
        double train_mean = 0;
        for (double a : train_acc) train_mean += a;
        train_mean /= static_cast<double>(train_acc.size());
        const json& privacy = first->report["privacy"];
        const bool is_private = first->eps_dp.has_value();
        table.AddRow(
            {method, entry.name, schedule,
             run.epochs ? absl::StrCat(*run.epochs) : "",
             absl::StrCat(first->report["training"]["iterations"].get<int64_t>()),
             is_private ? Cell(*first->eps_dp) : "",
             is_private ? Cell(privacy["delta"].get<double>()) : "",
             is_private ? Cell(privacy["alpha"].get<double>()) : "",
             absl::StrCat(spec.seeds), Cell(mean), Cell(stderr_),
             Cell(train_mean), Cell(first->majority_rate)});
      }
    }
  }
  return table;
}

}  // namespace dpsgld

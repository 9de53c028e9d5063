#include "pvprof/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pvprof/error.hpp"

namespace pvprof {

namespace {

constexpr std::size_t kMinTrainingPairs = 20;

// Index of the history record at exactly `t`, or npos.
std::size_t find_at(std::span<const TelemetryRecord> history, Instant t) {
  auto it = std::lower_bound(history.begin(), history.end(), t,
                             [](const TelemetryRecord& r, Instant x) { return r.timestamp < x; });
  if (it == history.end() || it->timestamp != t) return std::numeric_limits<std::size_t>::max();
  return static_cast<std::size_t>(it - history.begin());
}

std::size_t require_at(std::span<const TelemetryRecord> history, Instant t, Instant target) {
  const std::size_t k = find_at(history, t);
  if (k == std::numeric_limits<std::size_t>::max())
    throw DataError("persistence history has no sample at " + format_instant(t) + " for forecast time " +
                    format_instant(target));
  return k;
}

Eigen::Vector3d standardized(const RegressorModel& m, const FeatureVector& x) {
  return {(x.g_poa - m.mean[0]) / m.stddev[0], (x.t_module - m.mean[1]) / m.stddev[1],
          (x.hod - m.mean[2]) / m.stddev[2]};
}

std::array<double, kFeatureCount> as_array(const FeatureVector& x) { return {x.g_poa, x.t_module, x.hod}; }

double daylight_nmae(std::span<const TelemetryRecord> records, const RegressorModel& model, double p_nominal,
                     double g_min) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const TelemetryRecord& r : records) {
    if (r.g_poa < g_min) continue;
    sum += std::abs(predict_regressor(model, features_of(r)) - r.power());
    ++n;
  }
  if (n == 0) throw DataError("validation holdout has no daylight samples");
  return sum / static_cast<double>(n) / p_nominal;
}

}  // namespace

ForecastSeries smart_persistence(std::span<const TelemetryRecord> history, std::span<const TelemetryRecord> future,
                                 std::chrono::seconds horizon, double g_min) {
  ForecastSeries out;
  out.model = "smart_persistence";
  for (const TelemetryRecord& f : future) {
    const std::size_t k = require_at(history, f.timestamp - horizon, f.timestamp);
    double p = 0.0;
    if (history[k].g_poa >= g_min) {
      p = history[k].power() * f.g_poa / history[k].g_poa;
    } else if (f.g_poa >= g_min) {
      const Day day = day_of(history[k].timestamp);
      for (std::size_t j = k; j-- > 0 && day_of(history[j].timestamp) == day;) {
        if (history[j].g_poa >= g_min) {
          p = history[j].power() * f.g_poa / history[j].g_poa;
          break;
        }
      }
    }
    out.timestamps.push_back(f.timestamp);
    out.p_pred.push_back(p);
    out.p_meas.push_back(f.power());
  }
  return out;
}

ForecastSeries naive_persistence(std::span<const TelemetryRecord> history, std::span<const TelemetryRecord> future,
                                 std::chrono::seconds horizon) {
  ForecastSeries out;
  out.model = "naive_persistence";
  for (const TelemetryRecord& f : future) {
    const std::size_t k = require_at(history, f.timestamp - horizon, f.timestamp);
    out.timestamps.push_back(f.timestamp);
    out.p_pred.push_back(history[k].power());
    out.p_meas.push_back(f.power());
  }
  return out;
}

FeatureVector features_of(const TelemetryRecord& r) { return {r.g_poa, r.t_module, hour_of_day(r.timestamp) / 24.0}; }

std::string to_string(RegressorFamily f) { return f == RegressorFamily::linear ? "lr" : "kr"; }

RegressorFamily regressor_family_from_string(const std::string& s) {
  if (s == "lr" || s == "linear") return RegressorFamily::linear;
  if (s == "kr" || s == "kernel_ridge") return RegressorFamily::kernel_ridge;
  throw ConfigError("unknown regressor family '" + s + "'");
}

RegressorModel train_regressor(RegressorFamily family, std::span<const FeatureVector> features,
                               std::span<const double> power, const RegressorHyperparams& hyper) {
  if (features.size() != power.size()) throw DataError("feature and target counts differ");
  if (features.size() < kMinTrainingPairs)
    throw DataError("regressor needs at least 20 training pairs, got " + std::to_string(features.size()));
  if (!(hyper.lambda >= 0.0) || !(hyper.gamma > 0.0)) throw ConfigError("invalid regressor hyperparameters");

  const auto n = static_cast<Eigen::Index>(features.size());
  RegressorModel m;
  m.family = family;
  m.hyper = hyper;
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double s = 0.0;
    for (const auto& x : features) s += as_array(x)[j];
    const double mean = s / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& x : features) ss += (as_array(x)[j] - mean) * (as_array(x)[j] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (!(sd > 1e-12 * std::max(1.0, std::abs(mean))))
      throw DataError("constant feature column " + std::to_string(j) + " in training data");
    m.mean[j] = mean;
    m.stddev[j] = sd;
  }

  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(kFeatureCount));
  Eigen::VectorXd y(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    z.row(k) = standardized(m, features[static_cast<std::size_t>(k)]).transpose();
    y(k) = power[static_cast<std::size_t>(k)];
  }
  m.target_mean = y.mean();
  y.array() -= m.target_mean;

  if (family == RegressorFamily::linear) {
    Eigen::Matrix3d a = z.transpose() * z;
    a.diagonal().array() += hyper.lambda;
    const Eigen::Vector3d b = z.transpose() * y;
    Eigen::LDLT<Eigen::Matrix3d> ldlt(a);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw NumericError("singular linear ridge system");
    m.coefficients = ldlt.solve(b);
  } else {
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index r = 0; r < n; ++r)
      for (Eigen::Index c = r; c < n; ++c) {
        const double v = std::exp(-hyper.gamma * (z.row(r) - z.row(c)).squaredNorm());
        k(r, c) = v;
        k(c, r) = v;
      }
    k.diagonal().array() += hyper.lambda;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(k);
    if (ldlt.info() != Eigen::Success) throw NumericError("singular kernel ridge system");
    m.coefficients = ldlt.solve(y);
    const double rel = (k * m.coefficients - y).norm() / std::max(1.0, y.norm());
    if (!std::isfinite(rel) || rel > 1e-6) throw NumericError("kernel ridge system is singular beyond regularization");
    m.support = std::move(z);
  }
  if (!m.coefficients.allFinite()) throw NumericError("regressor coefficients are not finite");
  return m;
}

double predict_regressor(const RegressorModel& model, const FeatureVector& x) {
  const Eigen::Vector3d z = standardized(model, x);
  double p = model.target_mean;
  if (model.family == RegressorFamily::linear) {
    p += model.coefficients.dot(z);
  } else {
    for (Eigen::Index k = 0; k < model.support.rows(); ++k)
      p += model.coefficients(k) * std::exp(-model.hyper.gamma * (model.support.row(k).transpose() - z).squaredNorm());
  }
  return std::max(0.0, p);
}

std::vector<double> predict_regressor(const RegressorModel& model, std::span<const FeatureVector> xs) {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict_regressor(model, x));
  return out;
}

void daylight_training_set(std::span<const TelemetryRecord> records, double g_min, std::vector<FeatureVector>& features,
                           std::vector<double>& power) {
  features.clear();
  power.clear();
  for (const TelemetryRecord& r : records) {
    if (r.g_poa < g_min) continue;
    features.push_back(features_of(r));
    power.push_back(r.power());
  }
}

void validate(const GridSearchSpec& spec) {
  if (spec.lambdas.empty() || spec.gammas.empty() || spec.training_days.empty())
    throw ConfigError("grid search grids must be nonempty");
  if (!std::is_sorted(spec.training_days.begin(), spec.training_days.end()) || spec.training_days.front() < 1)
    throw ConfigError("training lengths must be positive and sorted ascending");
  // Grid order doubles as the tie-break, so the value grids must ascend too.
  if (!std::is_sorted(spec.lambdas.begin(), spec.lambdas.end()) || !(spec.lambdas.front() > 0.0))
    throw ConfigError("lambdas must be positive and sorted ascending");
  if (!std::is_sorted(spec.gammas.begin(), spec.gammas.end()) || !(spec.gammas.front() > 0.0))
    throw ConfigError("gammas must be positive and sorted ascending");
  if (spec.holdout_days < 1) throw ConfigError("holdout must be at least one day");
}

GridSearchResult grid_search(const GridSearchSpec& spec, RegressorFamily family,
                             std::span<const TelemetryRecord> history, double p_nominal, double g_min) {
  validate(spec);
  if (!(p_nominal > 0.0)) throw ConfigError("p_nominal must be positive");
  if (history.empty()) throw DataError("grid search requires history");

  const Day first = day_of(history.front().timestamp);
  const Day holdout_start = day_of(history.back().timestamp) + std::chrono::days{1 - spec.holdout_days};
  const auto holdout = slice(history, Instant{holdout_start}, Instant{holdout_start + std::chrono::days{spec.holdout_days}});

  const std::vector<double> gammas = family == RegressorFamily::linear ? std::vector<double>{spec.gammas.front()}
                                                                         : spec.gammas;
  GridSearchResult result;
  result.family = family;
  const GridCell* best = nullptr;
  std::vector<FeatureVector> xs;
  std::vector<double> ys;
  for (int days : spec.training_days) {
    const Day train_start = holdout_start - std::chrono::days{days};
    const bool enough = train_start >= first;
    if (enough) daylight_training_set(slice(history, Instant{train_start}, Instant{holdout_start}), g_min, xs, ys);
    for (double lambda : spec.lambdas)
      for (double gamma : gammas) {
        GridCell cell;
        cell.training_days = days;
        cell.hyper = {lambda, gamma};
        if (!enough) {
          cell.note = "history shorter than training length plus holdout";
        } else {
          try {
            const RegressorModel m = train_regressor(family, xs, ys, cell.hyper);
            cell.validation_nmae = daylight_nmae(holdout, m, p_nominal, g_min);
            cell.valid = true;
          } catch (const Error& e) {
            cell.note = e.what();
          }
        }
        result.table.push_back(cell);
      }
  }
  // Grid order is ascending in length, lambda and gamma, so a strict
  // comparison applies the tie-breaks.
  for (const GridCell& c : result.table)
    if (c.valid && (!best || c.validation_nmae < best->validation_nmae)) best = &c;
  if (!best) throw DataError("grid search found no valid cell for " + to_string(family));
  result.best_hyper = best->hyper;
  result.best_training_days = best->training_days;
  return result;
}

}  // namespace pvprof

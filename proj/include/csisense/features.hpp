#pragma once

// Amplitude and phase eigen-features.
//
// Amplitude: stack the per-snapshot F x M amplitude matrices as columns of a
// (F*M) x N matrix D, cut D into windows E of T_w columns, take the
// eigenvalues of the T_w x T_w Gram matrix E^T E, drop the largest one and
// average the next k_a over windows.
//
// Phase: fit a straight line to every unwrapped (f, m) phase series, collect
// the residual variances into an F x M matrix Q, and keep eigenvalues
// 2..k_p+1 of the Pearson correlation matrix of Q's columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "csisense/csi_tensor.hpp"
#include "csisense/error.hpp"
#include "csisense/linalg.hpp"
#include "csisense/preprocess.hpp"

namespace csisense {

struct WindowConfig {
  std::size_t window_len = 100;  // snapshots per window (1 s at 100 Hz)
  std::size_t k_a = 6;
  std::size_t k_p = 6;
  std::size_t stride = 0;        // 0 means non-overlapping (stride = window_len)

  [[nodiscard]] std::size_t effective_stride() const { return stride == 0 ? window_len : stride; }

  void validate() const {
    if (window_len < k_a + 2)
      throw ArgumentError("WindowConfig: window_len " + std::to_string(window_len) + " < k_a + 2");
  }
};

struct AmplitudeFeature {
  std::vector<double> values;
};

struct PhaseFeature {
  std::vector<double> values;
};

/// x = [A, P].
struct FeatureVector {
  std::vector<double> values;
  std::size_t k_a = 0;
  std::size_t k_p = 0;

  [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
};

/// Gram matrix E^T E of the window starting at snapshot `start`.
inline Matrix window_gram(const AmplitudeTensor &a, std::size_t start, std::size_t len) {
  Matrix S(len, len);
  for (std::size_t f = 0; f < a.subcarriers(); ++f)
    for (std::size_t m = 0; m < a.chains(); ++m) {
      const auto s = a.series(f, m).subspan(start, len);
      for (std::size_t i = 0; i < len; ++i) {
        const double si = s[i];
        auto row = S.row(i);
        for (std::size_t j = i; j < len; ++j) row[j] += si * s[j];
      }
    }
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = 0; j < i; ++j) S(i, j) = S(j, i);
  return S;
}

/// Drops the largest eigenvalue and keeps the next k. Missing entries
/// (fewer than k + 1 eigenvalues) are an error.
inline std::vector<double> trailing_eigenvalues(const Matrix &S, std::size_t k) {
  const auto ev = eigvals_sym(S);
  if (ev.size() < k + 1)
    throw ArgumentError("need at least " + std::to_string(k + 1) + " eigenvalues, have " +
                        std::to_string(ev.size()));
  return {ev.begin() + 1, ev.begin() + 1 + static_cast<std::ptrdiff_t>(k)};
}

inline AmplitudeFeature extract_amplitude(const AmplitudeTensor &a, const WindowConfig &w) {
  w.validate();
  const std::size_t N = a.snapshots(), T = w.window_len, stride = w.effective_stride();
  if (N < T)
    throw ArgumentError("extract_amplitude: N=" + std::to_string(N) + " shorter than window " +
                        std::to_string(T));
  for (double v : a.values())
    if (!std::isfinite(v)) throw ArgumentError("extract_amplitude: non-finite input");

  std::vector<double> mean(w.k_a, 0.0);
  std::size_t windows = 0;
  for (std::size_t start = 0; start + T <= N; start += stride, ++windows) {
    const auto g = trailing_eigenvalues(window_gram(a, start, T), w.k_a);
    for (std::size_t i = 0; i < w.k_a; ++i) mean[i] += g[i];
  }
  for (auto &v : mean) v /= static_cast<double>(windows);
  return {std::move(mean)};
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

/// Least-squares line y ~ intercept + slope * xi with xi = 1..N. Solved in
/// centered form, which is algebraically the normal-equation solution.
inline LineFit fit_line(std::span<const double> y) {
  const std::size_t N = y.size();
  if (N < 2) throw ArgumentError("fit_line: need at least 2 samples");
  const double n = static_cast<double>(N);
  const double xbar = (n + 1.0) / 2.0;
  double ybar = 0.0;
  for (double v : y) ybar += v;
  ybar /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double dx = static_cast<double>(i + 1) - xbar;
    sxy += dx * (y[i] - ybar);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return {ybar - slope * xbar, slope};
}

/// eta = y - slope * xi - intercept.
inline std::vector<double> line_residuals(std::span<const double> y, const LineFit &fit) {
  std::vector<double> eta(y.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    eta[i] = y[i] - fit.slope * static_cast<double>(i + 1) - fit.intercept;
  return eta;
}

/// Residual spread below this fraction of the series magnitude is rounding
/// noise and is reported as exactly zero.
inline constexpr double kResidualFloor = 1e-12;

/// Population variance of the residual about the least-squares line.
inline double residual_variance(std::span<const double> y) {
  const auto eta = line_residuals(y, fit_line(y));
  double mean = 0.0;
  for (double v : eta) mean += v;
  mean /= static_cast<double>(eta.size());
  double var = 0.0;
  for (double v : eta) var += (v - mean) * (v - mean);
  var /= static_cast<double>(eta.size());

  double scale = 1.0;
  for (double v : y) scale = std::max(scale, std::abs(v));
  if (std::sqrt(var) <= kResidualFloor * scale) return 0.0;
  return var;
}

/// Pearson correlation between the columns of X (observations in rows).
/// A column with no spread gets 1 on the diagonal and 0 elsewhere.
inline Matrix column_correlation(const Matrix &X) {
  const std::size_t R = X.rows(), C = X.cols();
  Matrix centered(R, C);
  std::vector<double> sd(C, 0.0);
  std::vector<bool> degenerate(C, false);
  for (std::size_t c = 0; c < C; ++c) {
    double mean = 0.0, peak = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      mean += X(r, c);
      peak = std::max(peak, std::abs(X(r, c)));
    }
    mean /= static_cast<double>(R);
    double ss = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      centered(r, c) = X(r, c) - mean;
      ss += centered(r, c) * centered(r, c);
    }
    sd[c] = std::sqrt(ss);
    degenerate[c] = sd[c] <= kResidualFloor * peak || sd[c] == 0.0;
  }
  Matrix corr = Matrix::identity(C);
  for (std::size_t i = 0; i < C; ++i) {
    if (degenerate[i]) continue;
    for (std::size_t j = i + 1; j < C; ++j) {
      if (degenerate[j]) continue;
      double s = 0.0;
      for (std::size_t r = 0; r < R; ++r) s += centered(r, i) * centered(r, j);
      const double rho = std::clamp(s / (sd[i] * sd[j]), -1.0, 1.0);
      corr(i, j) = rho;
      corr(j, i) = rho;
    }
  }
  return corr;
}

/// F x M matrix of residual variances q_{f,m}.
inline Matrix residual_variance_matrix(const PhaseTensor &p) {
  Matrix Q(p.subcarriers(), p.chains());
  for (std::size_t f = 0; f < p.subcarriers(); ++f)
    for (std::size_t m = 0; m < p.chains(); ++m) Q(f, m) = residual_variance(p.series(f, m));
  return Q;
}

inline PhaseFeature extract_phase(const PhaseTensor &p, std::size_t k_p) {
  if (p.snapshots() < 3) throw ArgumentError("extract_phase: need N >= 3 snapshots");
  if (p.chains() < k_p + 2)
    throw ArgumentError("extract_phase: M=" + std::to_string(p.chains()) + " too small for k_p=" +
                        std::to_string(k_p) + " (need M >= k_p + 2)");
  return {trailing_eigenvalues(column_correlation(residual_variance_matrix(p)), k_p)};
}

inline FeatureVector build_feature_vector(const AmplitudeFeature &a, const PhaseFeature &p, std::size_t k_a,
                                          std::size_t k_p) {
  if (a.values.size() != k_a)
    throw ArgumentError("build_feature_vector: amplitude length " + std::to_string(a.values.size()) +
                        " != k_a " + std::to_string(k_a));
  if (p.values.size() != k_p)
    throw ArgumentError("build_feature_vector: phase length " + std::to_string(p.values.size()) +
                        " != k_p " + std::to_string(k_p));
  FeatureVector x{a.values, k_a, k_p};
  x.values.insert(x.values.end(), p.values.begin(), p.values.end());
  return x;
}

struct FeatureConfig {
  WindowConfig window;
  DenoiseOptions denoise;
};

/// Number of phase eigen-features an array of M chains can supply.
inline std::size_t available_phase_features(std::size_t M, std::size_t k_p) {
  return M >= 2 ? std::min(k_p, M - 2) : 0;
}

/// Full per-capture feature path: preprocess, then both extractors. Arrays
/// too small for k_p phase features (M < k_p + 2) get the missing trailing
/// entries filled with zeros so the vector length stays k_a + k_p.
inline FeatureVector extract_features(const CsiTensor &t, const FeatureConfig &cfg) {
  const auto pre = preprocess(t, cfg.denoise);
  const auto amp = extract_amplitude(pre.amplitude, cfg.window);
  const std::size_t k_p = cfg.window.k_p;
  const std::size_t avail = available_phase_features(t.chains(), k_p);
  PhaseFeature ph;
  if (avail > 0) ph = extract_phase(pre.phase, avail);
  ph.values.resize(k_p, 0.0);
  return build_feature_vector(amp, ph, cfg.window.k_a, k_p);
}

/// One exported feature row.
struct FeatureRow {
  Event label = Event::V1;
  Scenario scenario = Scenario::Los;
  std::vector<double> x;

  friend bool operator==(const FeatureRow &, const FeatureRow &) = default;
};

inline nlohmann::json feature_rows_to_json(std::span<const FeatureRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &r : rows)
    arr.push_back({{"label", event_name(r.label)}, {"scenario", scenario_name(r.scenario)}, {"x", r.x}});
  return arr;
}

inline std::vector<FeatureRow> feature_rows_from_json(const nlohmann::json &j) {
  if (!j.is_array()) throw FormatError("feature rows: expected a JSON array");
  std::vector<FeatureRow> rows;
  try {
    for (const auto &e : j)
      rows.push_back({parse_event(e.at("label").get<std::string>()),
                      parse_scenario(e.at("scenario").get<std::string>()),
                      e.at("x").get<std::vector<double>>()});
  } catch (const nlohmann::json::exception &ex) {
    throw FormatError(std::string("feature rows: ") + ex.what());
  }
  return rows;
}

}  // namespace csisense

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "csisense/csi_tensor.hpp"
#include "csisense/error.hpp"

namespace csisense {

/// Real-valued F x M x N cube with the same layout as CsiTensor.
template <typename Tag>
class RealCube {
 public:
  RealCube() = default;

  RealCube(std::size_t F, std::size_t M, std::size_t N, std::vector<double> values)
      : F_(F), M_(M), N_(N), values_(std::move(values)) {
    if (values_.size() != F_ * M_ * N_) throw ArgumentError("RealCube: values size != F*M*N");
    for (double v : values_) {
      if (!std::isfinite(v)) throw ArgumentError("RealCube: non-finite value");
      if constexpr (Tag::nonnegative)
        if (v < 0.0) throw ArgumentError("AmplitudeTensor: negative value");
    }
  }

  [[nodiscard]] std::size_t subcarriers() const noexcept { return F_; }
  [[nodiscard]] std::size_t chains() const noexcept { return M_; }
  [[nodiscard]] std::size_t snapshots() const noexcept { return N_; }
  [[nodiscard]] double at(std::size_t f, std::size_t m, std::size_t n) const {
    return values_[(f * M_ + m) * N_ + n];
  }
  [[nodiscard]] std::span<const double> series(std::size_t f, std::size_t m) const {
    return {values_.data() + (f * M_ + m) * N_, N_};
  }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  friend bool operator==(const RealCube &, const RealCube &) = default;

 private:
  std::size_t F_ = 0, M_ = 0, N_ = 0;
  std::vector<double> values_;
};

struct AmplitudeTag {
  static constexpr bool nonnegative = true;
};
struct PhaseTag {
  static constexpr bool nonnegative = false;
};

/// |Z| on a uniform snapshot grid.
using AmplitudeTensor = RealCube<AmplitudeTag>;
/// Phase in radians, unwrapped along the snapshot axis.
using PhaseTensor = RealCube<PhaseTag>;

// ---------------------------------------------------------------------------
// Resampling
// ---------------------------------------------------------------------------

/// Resamples every (f, m) series onto N evenly spaced instants spanning
/// [t_0, t_{N-1}]. Real and imaginary parts are interpolated linearly. The
/// endpoints are reproduced bit-exactly and an already uniform grid is
/// returned unchanged.
inline CsiTensor interpolate_uniform(const CsiTensor &t) {
  const std::size_t N = t.snapshots();
  if (N < 2) throw ArgumentError("interpolate_uniform: need N >= 2 snapshots");
  const auto ts = t.timestamps();
  const double t0 = ts.front(), t1 = ts.back();
  const double step = (t1 - t0) / static_cast<double>(N - 1);

  std::vector<double> grid(N);
  for (std::size_t i = 0; i < N; ++i) grid[i] = t0 + step * static_cast<double>(i);
  grid.back() = t1;

  const double tol = 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), std::abs(t1));
  bool uniform = true;
  for (std::size_t i = 0; i < N && uniform; ++i) uniform = std::abs(ts[i] - grid[i]) <= tol;
  if (uniform) return t;

  // Segment index and weight for each grid point; shared by all series.
  std::vector<std::size_t> seg(N);
  std::vector<double> w(N);
  std::size_t j = 0;
  for (std::size_t i = 0; i < N; ++i) {
    while (j + 2 < N && ts[j + 1] <= grid[i]) ++j;
    seg[i] = j;
    w[i] = (grid[i] - ts[j]) / (ts[j + 1] - ts[j]);
  }
  w.front() = 0.0;
  seg.back() = N - 2;
  w.back() = 1.0;

  const std::size_t F = t.subcarriers(), M = t.chains();
  std::vector<cplx> out(F * M * N);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t m = 0; m < M; ++m) {
      const auto y = t.series(f, m);
      cplx *o = out.data() + (f * M + m) * N;
      for (std::size_t i = 0; i < N; ++i) {
        const std::size_t k = seg[i];
        if (w[i] == 0.0)
          o[i] = y[k];
        else if (w[i] == 1.0)
          o[i] = y[k + 1];
        else
          o[i] = cplx(y[k].real() + w[i] * (y[k + 1].real() - y[k].real()),
                      y[k].imag() + w[i] * (y[k + 1].imag() - y[k].imag()));
      }
    }
  return {F, M, N, std::move(grid), std::move(out)};
}

// ---------------------------------------------------------------------------
// Wavelet denoising (Daubechies-4, 8 taps, half-sample symmetric extension)
// ---------------------------------------------------------------------------

namespace wavelet {

inline constexpr std::array<double, 8> kDb4Lo{
    -0.010597401785069032, 0.0328830116668852,  0.030841381835560764, -0.18703481171909309,
    -0.027983769416859854, 0.6308807679298589,  0.7148465705529157,   0.2303778133088965};

inline constexpr std::array<double, 8> kDb4Hi = [] {
  std::array<double, 8> h{};
  for (std::size_t k = 0; k < 8; ++k) h[k] = ((k % 2 == 0) ? -1.0 : 1.0) * kDb4Lo[7 - k];
  return h;
}();

inline constexpr std::size_t kTaps = kDb4Lo.size();

/// Half-sample symmetric reflection of index i into [0, n).
inline std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto period = static_cast<std::ptrdiff_t>(2 * n);
  std::ptrdiff_t r = i % period;
  if (r < 0) r += period;
  return r < static_cast<std::ptrdiff_t>(n) ? static_cast<std::size_t>(r)
                                            : static_cast<std::size_t>(period - 1 - r);
}

struct Bands {
  std::vector<double> approx;
  std::vector<double> detail;
};

/// One analysis step; both outputs have floor((n + 7) / 2) coefficients.
inline Bands analyze(std::span<const double> x) {
  const std::size_t n = x.size();
  const std::size_t K = (n + kTaps - 1) / 2;
  Bands b{std::vector<double>(K), std::vector<double>(K)};
  for (std::size_t o = 0; o < K; ++o) {
    double a = 0.0, d = 0.0;
    for (std::size_t j = 0; j < kTaps; ++j) {
      const double v = x[reflect(static_cast<std::ptrdiff_t>(2 * o + 1) - static_cast<std::ptrdiff_t>(j), n)];
      a += kDb4Lo[j] * v;
      d += kDb4Hi[j] * v;
    }
    b.approx[o] = a;
    b.detail[o] = d;
  }
  return b;
}

/// Inverse of analyze() for a signal of original length n.
inline std::vector<double> synthesize(std::span<const double> approx, std::span<const double> detail,
                                      std::size_t n) {
  const std::size_t K = approx.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    // Coefficient o contributes through tap k = i + 6 - 2o, 0 <= k < 8.
    const std::size_t o_hi = std::min<std::size_t>(K - 1, (i + kTaps - 2) / 2);
    const std::size_t o_lo = i >= 1 ? (i - 1 + 1) / 2 : 0;
    double s = 0.0;
    for (std::size_t o = o_lo; o <= o_hi; ++o) {
      const std::size_t k = i + kTaps - 2 - 2 * o;
      if (k >= kTaps) continue;
      s += kDb4Lo[kTaps - 1 - k] * approx[o] + kDb4Hi[kTaps - 1 - k] * detail[o];
    }
    out[i] = s;
  }
  return out;
}

/// Two-level decomposition: approx2, detail2 (coarse), detail1 (fine).
struct Decomposition {
  std::vector<double> approx2;
  std::vector<double> detail2;
  std::vector<double> detail1;
  std::size_t length = 0;
  std::size_t level1_length = 0;
};

inline Decomposition decompose2(std::span<const double> x) {
  auto l1 = analyze(x);
  auto l2 = analyze(l1.approx);
  return {std::move(l2.approx), std::move(l2.detail), std::move(l1.detail), x.size(),
          l1.approx.size()};
}

inline std::vector<double> reconstruct2(const Decomposition &d) {
  const auto a1 = synthesize(d.approx2, d.detail2, d.level1_length);
  return synthesize(a1, d.detail1, d.length);
}

inline double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

/// Median absolute value scaled to a Gaussian standard deviation.
inline double mad_sigma(std::span<const double> band) {
  if (band.empty()) return 0.0;
  std::vector<double> a(band.size());
  std::transform(band.begin(), band.end(), a.begin(), [](double v) { return std::abs(v); });
  const auto mid = a.begin() + static_cast<std::ptrdiff_t>(a.size() / 2);
  std::nth_element(a.begin(), mid, a.end());
  double med = *mid;
  if (a.size() % 2 == 0) med = 0.5 * (med + *std::max_element(a.begin(), mid));
  return med / 0.6744897501960817;
}

/// Threshold minimizing Stein's unbiased risk estimate of soft thresholding
/// for coefficients with noise level sigma. Candidates are the coefficient
/// magnitudes themselves.
inline double sure_threshold(std::span<const double> band, double sigma) {
  const std::size_t n = band.size();
  if (n == 0 || !(sigma > 0.0)) return 0.0;
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = band[i] / sigma;
    sq[i] = x * x;
  }
  std::sort(sq.begin(), sq.end());
  // risk(k) = n - 2(k+1) + sum_{i<=k} sq_i + (n-k-1) sq_k
  double best = std::numeric_limits<double>::infinity(), best_sq = 0.0, cum = 0.0;
  const auto nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    cum += sq[k];
    const auto kd = static_cast<double>(k);
    const double risk = nd - 2.0 * (kd + 1.0) + cum + (nd - kd - 1.0) * sq[k];
    if (risk < best) {
      best = risk;
      best_sq = sq[k];
    }
  }
  return std::sqrt(best_sq) * sigma;
}

}  // namespace wavelet

struct DenoiseOptions {
  /// Test hook: skip thresholding, leaving a pure analysis/synthesis round trip.
  bool zero_thresholds = false;
};

/// Two-level DWT, per-band SURE soft thresholding of both detail bands,
/// inverse DWT. The noise level comes from the finest detail band.
inline std::vector<double> denoise_series(std::span<const double> x, const DenoiseOptions &opt = {}) {
  if (x.size() < 8) throw ArgumentError("denoise: need at least 8 samples, got " + std::to_string(x.size()));
  auto dec = wavelet::decompose2(x);
  if (!opt.zero_thresholds) {
    const double sigma = wavelet::mad_sigma(dec.detail1);
    for (auto *band : {&dec.detail1, &dec.detail2}) {
      const double t = wavelet::sure_threshold(*band, sigma);
      for (auto &c : *band) c = wavelet::soft_threshold(c, t);
    }
  }
  return wavelet::reconstruct2(dec);
}

inline AmplitudeTensor amplitude_of(const CsiTensor &t) {
  std::vector<double> v(t.data().size());
  std::transform(t.data().begin(), t.data().end(), v.begin(), [](const cplx &z) { return std::abs(z); });
  return {t.subcarriers(), t.chains(), t.snapshots(), std::move(v)};
}

/// Denoises every (f, m) series. Tiny negative excursions produced by the
/// filter bank are clamped to zero.
inline AmplitudeTensor denoise_amplitude(const AmplitudeTensor &a, const DenoiseOptions &opt = {}) {
  const std::size_t F = a.subcarriers(), M = a.chains(), N = a.snapshots();
  if (N < 8) throw ArgumentError("denoise_amplitude: need N >= 8, got " + std::to_string(N));
  std::vector<double> out(F * M * N);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t m = 0; m < M; ++m) {
      const auto y = denoise_series(a.series(f, m), opt);
      std::transform(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>((f * M + m) * N),
                     [](double v) { return std::max(v, 0.0); });
    }
  return {F, M, N, std::move(out)};
}

// ---------------------------------------------------------------------------
// Phase unwrapping
// ---------------------------------------------------------------------------

/// Unwraps principal-value phases in place. A step is corrected only when its
/// magnitude is strictly greater than pi.
inline void unwrap_in_place(std::span<double> phase) {
  constexpr double pi = std::numbers::pi, two_pi = 2.0 * std::numbers::pi;
  double offset = 0.0;
  double prev_raw = phase.empty() ? 0.0 : phase[0];
  for (std::size_t n = 1; n < phase.size(); ++n) {
    const double raw = phase[n];
    const double d = raw - prev_raw;
    if (std::abs(d) > pi) offset -= two_pi * std::ceil((d - pi) / two_pi);
    prev_raw = raw;
    phase[n] = raw + offset;
  }
}

inline PhaseTensor unwrap_phase(const CsiTensor &t) {
  const std::size_t F = t.subcarriers(), M = t.chains(), N = t.snapshots();
  std::vector<double> out(F * M * N);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t m = 0; m < M; ++m) {
      const auto y = t.series(f, m);
      std::span<double> dst(out.data() + (f * M + m) * N, N);
      for (std::size_t n = 0; n < N; ++n) dst[n] = std::arg(y[n]);
      unwrap_in_place(dst);
    }
  return {F, M, N, std::move(out)};
}

/// Interpolated signal split into the two feature paths.
struct Preprocessed {
  AmplitudeTensor amplitude;  // denoised
  PhaseTensor phase;          // unwrapped
};

/// interpolate -> (|.| -> denoise) and (unwrap).
inline Preprocessed preprocess(const CsiTensor &t, const DenoiseOptions &opt = {}) {
  const CsiTensor u = interpolate_uniform(t);
  return {denoise_amplitude(amplitude_of(u), opt), unwrap_phase(u)};
}

}  // namespace csisense

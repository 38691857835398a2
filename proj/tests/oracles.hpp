// Independent reference computations used by the unit and acceptance tests.
#pragma once

#include <csisense/csisense.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

using csisense::Matrix;

/// Cyclic Jacobi rotations; eigenvalues sorted descending.
inline std::vector<double> jacobi_eigenvalues(Matrix A, double tol = 1e-15, int max_sweeps = 100) {
  const std::size_t n = A.rows();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += A(i, j) * A(i, j);
        if (i != j) off += A(i, j) * A(i, j);
      }
    if (off <= tol * tol * std::max(total, 1e-300)) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = A(i, i);
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

/// Closed-form eigenvalues of a symmetric 3x3 matrix from its characteristic
/// polynomial (trigonometric solution), sorted descending.
inline std::vector<double> eig3_charpoly(const Matrix &A) {
  const double a = A(0, 0), b = A(1, 1), c = A(2, 2);
  const double d = A(0, 1), e = A(1, 2), f = A(0, 2);
  const double p1 = d * d + e * e + f * f;
  std::vector<double> v;
  if (p1 == 0.0) {
    v = {a, b, c};
  } else {
    const double q = (a + b + c) / 3.0;
    const double p2 = (a - q) * (a - q) + (b - q) * (b - q) + (c - q) * (c - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    const double b00 = (a - q) / p, b11 = (b - q) / p, b22 = (c - q) / p;
    const double b01 = d / p, b12 = e / p, b02 = f / p;
    const double det = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02);
    const double r = std::clamp(det / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double l1 = q + 2.0 * p * std::cos(phi);
    const double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    v = {l1, 3.0 * q - l1 - l3, l3};
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

inline Matrix random_symmetric(std::size_t n, csisense::rng::Engine &eng, double scale = 1.0) {
  Matrix S(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) S(i, j) = S(j, i) = csisense::rng::uniform(eng, -scale, scale);
  return S;
}

/// Pearson correlation written out from covariance and standard deviations.
inline Matrix pearson(const Matrix &X) {
  const std::size_t R = X.rows(), C = X.cols();
  std::vector<double> mu(C, 0.0);
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t r = 0; r < R; ++r) mu[c] += X(r, c);
    mu[c] /= static_cast<double>(R);
  }
  Matrix cov(C, C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < R; ++r) s += (X(r, i) - mu[i]) * (X(r, j) - mu[j]);
      cov(i, j) = s / static_cast<double>(R - 1);
    }
  Matrix out(C, C);
  for (std::size_t i = 0; i < C; ++i)
    for (std::size_t j = 0; j < C; ++j) out(i, j) = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
  return out;
}

/// Flattened analytic gradient in the same order as Network::parameters().
inline std::vector<double> flatten(const csisense::NetworkGradient &g) {
  std::vector<double> out;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    out.insert(out.end(), g.weights[i].begin(), g.weights[i].end());
    out.insert(out.end(), g.bias[i].begin(), g.bias[i].end());
  }
  return out;
}

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t params = 0;
};

/// Central differences of the mean cross-entropy against backprop.
inline GradientCheck check_gradient(csisense::Network net, const Matrix &X, const std::vector<int> &y, double h,
                                    double floor) {
  std::vector<std::size_t> rows(X.rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  auto g = net.make_gradient();
  net.loss_and_gradient(X, y, rows, g);
  const auto analytic = flatten(g);
  auto p = net.parameters();
  auto scratch = net.make_gradient();
  GradientCheck out{0.0, p.size()};
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double orig = p[k];
    p[k] = orig + h;
    net.set_parameters(p);
    const double lp = net.loss_and_gradient(X, y, rows, scratch);
    p[k] = orig - h;
    net.set_parameters(p);
    const double lm = net.loss_and_gradient(X, y, rows, scratch);
    p[k] = orig;
    const double numeric = (lp - lm) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[k]), std::abs(numeric), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic[k] - numeric) / denom);
  }
  return out;
}

/// Builds a phase tensor from a generator g(f, m, n).
inline csisense::PhaseTensor phase_from(std::size_t F, std::size_t M, std::size_t N,
                                        const std::function<double(std::size_t, std::size_t, std::size_t)> &g) {
  std::vector<double> v(F * M * N);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t n = 0; n < N; ++n) v[(f * M + m) * N + n] = g(f, m, n);
  return {F, M, N, std::move(v)};
}

inline csisense::AmplitudeTensor amplitude_from(std::size_t F, std::size_t M, std::size_t N,
                                                const std::function<double(std::size_t, std::size_t, std::size_t)> &g) {
  std::vector<double> v(F * M * N);
  for (std::size_t f = 0; f < F; ++f)
    for (std::size_t m = 0; m < M; ++m)
      for (std::size_t n = 0; n < N; ++n) v[(f * M + m) * N + n] = g(f, m, n);
  return {F, M, N, std::move(v)};
}

inline double max_rel_diff(const std::vector<double> &a, const std::vector<double> &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace oracle

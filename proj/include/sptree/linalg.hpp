#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "sptree/errors.hpp"
#include "sptree/matrix.hpp"
#include "sptree/rng.hpp"

namespace sptree {

// Eigenvalues in descending order; eigenvectors (when requested) are the
// matching columns of an orthonormal matrix.
struct Spectrum {
  std::vector<double> values;
  std::optional<Matrix> vectors;
};

namespace detail {

// Flip so the first coordinate with non-negligible magnitude is positive.
inline void fix_sign(std::span<double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  if (m == 0.0) return;
  for (double x : v) {
    if (std::abs(x) > 1e-12 * m) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

}  // namespace detail

inline std::vector<double> mean(const Matrix& X, std::span<const index_t> rows) {
  if (rows.empty()) throw EmptyCell("mean of empty cell");
  std::vector<double> mu(X.cols(), 0.0);
  for (index_t r : rows) {
    auto x = X.row(r);
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] += x[j];
  }
  for (double& v : mu) v /= static_cast<double>(rows.size());
  return mu;
}

inline std::vector<double> mean(const Matrix& X) {
  std::vector<index_t> all(X.rows());
  std::iota(all.begin(), all.end(), index_t{0});
  return mean(X, all);
}

// Population covariance (divisor m), two-pass for stability.
inline SymMatrix covariance(const Matrix& X, std::span<const index_t> rows) {
  if (rows.empty()) throw EmptyCell("covariance of empty cell");
  const std::size_t d = X.cols();
  const auto mu = mean(X, rows);
  SymMatrix S(d);
  std::vector<double> c(d);
  std::vector<double> acc(d * d, 0.0);
  for (index_t r : rows) {
    auto x = X.row(r);
    for (std::size_t j = 0; j < d; ++j) c[j] = x[j] - mu[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) acc[i * d + j] += c[i] * c[j];
  }
  const double inv_m = 1.0 / static_cast<double>(rows.size());
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) S.set(i, j, acc[i * d + j] * inv_m);
  return S;
}

inline SymMatrix covariance(const Matrix& X) {
  std::vector<index_t> all(X.rows());
  std::iota(all.begin(), all.end(), index_t{0});
  return covariance(X, all);
}

// (1/m) sum of squared distances to the mean == trace of the covariance,
// without forming the D x D matrix.
inline double scatter_trace(const Matrix& X, std::span<const index_t> rows) {
  if (rows.empty()) throw EmptyCell("scatter of empty cell");
  const auto mu = mean(X, rows);
  double s = 0.0;
  for (index_t r : rows) s += squared_distance(X.row(r), mu);
  return s / static_cast<double>(rows.size());
}

namespace detail {

// Cyclic Jacobi on a dense symmetric matrix. Returns unsorted eigenvalues on
// the diagonal of `a`; accumulates rotations into `v` when non-null.
inline void jacobi_sweep_to_convergence(std::vector<double>& a, std::size_t n,
                                        std::vector<double>* v) {
  auto A = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };
  double fro = 0.0;
  for (double x : a) fro += x * x;
  fro = std::sqrt(fro);
  const double stop = 1e-15 * std::max(fro, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (std::sqrt(2.0 * off) <= stop) return;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = A(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double tau = (A(q, q) - A(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

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
        if (v) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = (*v)[k * n + p], vkq = (*v)[k * n + q];
            (*v)[k * n + p] = c * vkp - s * vkq;
            (*v)[k * n + q] = s * vkp + c * vkq;
          }
        }
      }
    }
  }
}

// Eigenvalues (descending) of a symmetric matrix given as a flat array.
// No symmetry validation; callers own that.
inline std::vector<double> sym_eigenvalues_only(std::vector<double> a, std::size_t n) {
  jacobi_sweep_to_convergence(a, n, nullptr);
  std::vector<double> vals(n);
  for (std::size_t i = 0; i < n; ++i) vals[i] = a[i * n + i];
  std::sort(vals.begin(), vals.end(), std::greater<>());
  return vals;
}

}  // namespace detail

// Full symmetric eigendecomposition via cyclic Jacobi rotations.
inline Spectrum eig_sym(const SymMatrix& S, bool want_vectors = false) {
  if (!S.is_symmetric(1e-12))
    throw InvalidMatrix("eig_sym: matrix is not symmetric");
  const std::size_t n = S.dim();
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a[i * n + j] = 0.5 * (S(i, j) + S(j, i));

  std::vector<double> v;
  if (want_vectors) {
    v.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
  }
  detail::jacobi_sweep_to_convergence(a, n, want_vectors ? &v : nullptr);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i] > a[j * n + j];
  });

  Spectrum spec;
  spec.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) spec.values[k] = a[order[k] * n + order[k]];
  if (want_vectors) {
    Matrix V(n, n);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) col[i] = v[i * n + order[k]];
      detail::fix_sign(col);
      for (std::size_t i = 0; i < n; ++i) V(i, k) = col[i];
    }
    spec.vectors = std::move(V);
  }
  return spec;
}

// Principal eigenvector. Power iteration on a Gershgorin-shifted copy (so the
// top eigenvalue dominates in magnitude even for indefinite input), falling
// back to the full Jacobi decomposition if the iteration stalls near a tie.
inline std::vector<double> top_eigenvector(const SymMatrix& S) {
  if (!S.is_symmetric(1e-12))
    throw InvalidMatrix("top_eigenvector: matrix is not symmetric");
  const std::size_t n = S.dim();
  if (S.trace() <= 0.0)
    throw DegenerateCell("top_eigenvector: non-positive trace");

  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_sum += std::abs(S(i, j));
    shift = std::max(shift, row_sum);
  }

  const double scale = std::max(S.max_abs(), 1e-300);
  auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = shift * x[i];
      for (std::size_t j = 0; j < n; ++j) s += S(i, j) * x[j];
      y[i] = s;
    }
  };

  // Deterministic start: axis of largest diagonal, perturbed by all-ones.
  std::size_t imax = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (S(i, i) > S(imax, imax)) imax = i;
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  x[imax] += 1.0;
  double nx = norm(x);
  for (double& e : x) e /= nx;

  std::vector<double> y(n);
  for (int it = 0; it < 10000; ++it) {
    apply(x, y);
    double ny = norm(y);
    if (ny == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) y[i] /= ny;
    x.swap(y);
    // Residual against the *unshifted* matrix.
    double lambda = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += S(i, j) * x[j];
      y[i] = s;
      lambda += x[i] * s;
    }
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double r = y[i] - lambda * x[i];
      res += r * r;
    }
    if (std::sqrt(res) <= 1e-10 * scale) {
      detail::fix_sign(x);
      return x;
    }
  }

  // Near-degenerate top of the spectrum: take the Jacobi answer.
  Spectrum spec = eig_sym(S, true);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (*spec.vectors)(i, 0);
  detail::fix_sign(v);
  return v;
}

// Uniform direction on the unit sphere S^{D-1}.
inline std::vector<double> sample_sphere(std::size_t dim, Rng& rng) {
  if (dim == 0) throw InvalidParam("sample_sphere: dim must be >= 1");
  std::vector<double> v(dim);
  for (;;) {
    for (double& e : v) e = rng.gaussian();
    double n = norm(v);
    if (n > 1e-12) {
      for (double& e : v) e /= n;
      return v;
    }
  }
}

// Eigenvalues (descending, padded to length D) of the cell covariance.
// When the cell has fewer points than coordinates the nonzero spectrum is
// computed from the m x m Gram matrix of centered points instead of the
// D x D covariance.
inline std::vector<double> cov_spectrum(const Matrix& X, std::span<const index_t> rows) {
  if (rows.empty()) throw EmptyCell("cov_spectrum of empty cell");
  const std::size_t m = rows.size();
  const std::size_t d = X.cols();

  if (m >= d) {
    SymMatrix S = covariance(X, rows);
    std::vector<double> a(d * d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) a[i * d + j] = S(i, j);
    return detail::sym_eigenvalues_only(std::move(a), d);
  }

  const auto mu = mean(X, rows);
  Matrix C(m, d);
  for (std::size_t i = 0; i < m; ++i) {
    auto x = X.row(rows[i]);
    for (std::size_t j = 0; j < d; ++j) C(i, j) = x[j] - mu[j];
  }
  std::vector<double> g(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j) {
      double s = dot(C.row(i), C.row(j)) / static_cast<double>(m);
      g[i * m + j] = s;
      g[j * m + i] = s;
    }
  std::vector<double> vals = detail::sym_eigenvalues_only(std::move(g), m);
  vals.resize(d, 0.0);
  return vals;
}

}  // namespace sptree

#include "mvgad/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mvgad/error.hpp"

namespace mvgad::numerics {

Standardized standardize(const DenseMatrix& x) {
  if (x.rows() < 2) {
    fail(ErrorCode::EmptyInput, "standardize needs at least 2 rows");
  }
  require_finite(x, "standardize input");
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  Standardized out{DenseMatrix(n, d), DenseVector(d, 0.0), DenseVector(d, 1.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += x(i, j);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = x(i, j) - mean;
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    out.means[j] = mean;
    if (sd > 0.0) {
      out.scales[j] = sd;
      for (std::size_t i = 0; i < n; ++i) out.values(i, j) = (x(i, j) - mean) / sd;
    }
  }
  return out;
}

namespace {

// Reduces the symmetric matrix held in v to tridiagonal form. On return v
// holds the accumulated orthogonal transform, d the diagonal and e the
// subdiagonal (e[0] unused).
void tridiagonalize(DenseMatrix& v, DenseVector& d, DenseVector& e) {
  const std::size_t n = v.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k <= i - 1; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k <= i - 1; ++k) {
          v(k, j) -= (f * e[k] + g * d[k]);
        }
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of v.
void ql_implicit(DenseMatrix& v, DenseVector& d, DenseVector& e) {
  const std::size_t n = v.rows();
  for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  const double eps = std::ldexp(1.0, -52);
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::size_t m = l;
    while (m < n) {
      if (std::abs(e[m]) <= eps * tst1) break;
      ++m;
    }
    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > kMaxSweepsPerEigenvalue) {
          fail(ErrorCode::NoConvergence,
               "QL iteration exceeded " + std::to_string(kMaxSweepsPerEigenvalue) +
                   " sweeps for eigenvalue " + std::to_string(l));
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[ii];
          h = c * p;
          r = std::hypot(p, e[ii]);
          e[ii + 1] = s * r;
          s = e[ii] / r;
          c = p / r;
          p = c * d[ii] - s * g;
          d[ii + 1] = h + s * (c * g + s * d[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            h = v(k, ii + 1);
            v(k, ii + 1) = s * v(k, ii) + c * h;
            v(k, ii) = c * v(k, ii) - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

EigenDecomposition sym_eig(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    fail(ErrorCode::DimensionMismatch, "sym_eig needs a square matrix");
  }
  const std::size_t n = a.rows();
  if (n == 0) fail(ErrorCode::EmptyInput, "sym_eig on empty matrix");
  require_finite(a, "sym_eig input");

  const double scale = a.max_abs();
  DenseMatrix v(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double asym = std::abs(a(i, j) - a(j, i));
      if (asym > 1e-9 * scale) {
        fail(ErrorCode::NotSymmetric,
             "matrix asymmetry " + std::to_string(asym) + " at (" +
                 std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      v(i, j) = 0.5 * (a(i, j) + a(j, i));
    }
  }

  DenseVector d(n, 0.0);
  DenseVector e(n, 0.0);
  if (n == 1) {
    d[0] = v(0, 0);
    v(0, 0) = 1.0;
  } else {
    tridiagonalize(v, d, e);
    ql_implicit(v, d, e);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return d[x] < d[y]; });

  EigenDecomposition out{DenseVector(n), DenseMatrix(n, n)};
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.eigenvalues[j] = d[src];
    double nrm = 0.0;
    for (std::size_t i = 0; i < n; ++i) nrm += v(i, src) * v(i, src);
    nrm = std::sqrt(nrm);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(v(i, src)) / nrm > 1e-12) {
        sign = v(i, src) < 0 ? -1.0 : 1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.eigenvectors(i, j) = sign * v(i, src) / nrm;
    }
  }
  return out;
}

PcaModel pca_fit(const DenseMatrix& x, double variance_threshold) {
  if (x.rows() < 2 || x.cols() < 1) {
    fail(ErrorCode::EmptyInput, "pca_fit needs at least 2 rows and 1 column");
  }
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0)) {
    fail(ErrorCode::InvalidConfig, "variance_threshold must lie in (0, 1]");
  }
  Standardized z = standardize(x);
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();

  DenseMatrix corr(d, d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += z.values(i, a) * z.values(i, b);
      s /= static_cast<double>(n - 1);
      corr(a, b) = s;
      corr(b, a) = s;
    }
  }
  EigenDecomposition eig = sym_eig(corr);

  PcaModel model;
  model.means = std::move(z.means);
  model.scales = std::move(z.scales);
  model.components = DenseMatrix(d, d);
  model.explained_variance_ratio.assign(d, 0.0);

  double total = 0.0;
  for (double lambda : eig.eigenvalues) total += std::max(lambda, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    const std::size_t src = d - 1 - j;
    for (std::size_t i = 0; i < d; ++i) {
      model.components(i, j) = eig.eigenvectors(i, src);
    }
    if (total > 0.0) {
      model.explained_variance_ratio[j] =
          std::max(eig.eigenvalues[src], 0.0) / total;
    }
  }

  model.m = d;
  if (total > 0.0) {
    double cumulative = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      cumulative += model.explained_variance_ratio[j];
      // Absorb rounding so a threshold of exactly 1 is reachable.
      if (cumulative >= variance_threshold - 1e-12) {
        model.m = j + 1;
        break;
      }
    }
  } else {
    model.m = 1;
  }
  return model;
}

DenseMatrix pca_transform(const PcaModel& model, const DenseMatrix& x) {
  const std::size_t d = model.means.size();
  if (x.cols() != d) {
    fail(ErrorCode::DimensionMismatch,
         "pca_transform expects " + std::to_string(d) + " columns, got " +
             std::to_string(x.cols()));
  }
  DenseMatrix out(x.rows(), model.m);
  DenseVector z(d);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      z[j] = (x(i, j) - model.means[j]) / model.scales[j];
    }
    for (std::size_t c = 0; c < model.m; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += z[j] * model.components(j, c);
      out(i, c) = s;
    }
  }
  return out;
}

}  // namespace mvgad::numerics

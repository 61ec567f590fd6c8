#include "serrin/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace serrin {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      s += val[k] * x[static_cast<std::size_t>(col[k])];
    y[i] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows, 0.0);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
      if (static_cast<std::size_t>(col[k]) == i)
        d[i] = val[k];
  return d;
}

double *CsrMatrix::find(std::size_t i, int j) {
  const auto first = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto last = col.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  if (it == last || *it != j)
    return nullptr;
  return &val[static_cast<std::size_t>(it - col.begin())];
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

CgResult conjugate_gradient(const CsrMatrix &a, std::span<const double> b, std::span<double> x,
                            double rel_tol, int max_iterations, bool jacobi) {
  const std::size_t n = a.rows;
  CgResult result;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    result.converged = true;
    return result;
  }
  std::vector<double> inv_diag(n, 1.0);
  if (jacobi) {
    const auto d = a.diagonal();
    for (std::size_t i = 0; i < n; ++i)
      inv_diag[i] = d[i] != 0.0 ? 1.0 / d[i] : 1.0;
  }
  std::vector<double> r(n), z(n), p(n), q(n);

  auto true_residual = [&] {
    a.multiply(x, q);
    for (std::size_t i = 0; i < n; ++i)
      r[i] = b[i] - q[i];
    return norm2(r);
  };

  double rnorm = true_residual();
  // The recursive residual drifts from the true one; restart from the
  // true residual whenever the recursion claims convergence.
  while (result.iterations < max_iterations) {
    if (rnorm <= rel_tol * bnorm)
      break;
    for (std::size_t i = 0; i < n; ++i)
      z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = dot(r, z);
    while (result.iterations < max_iterations) {
      a.multiply(p, q);
      const double pq = dot(p, q);
      if (!(pq > 0.0))
        break;
      const double alpha = rz / pq;
      for (std::size_t i = 0; i < n; ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      ++result.iterations;
      if (norm2(r) <= 0.5 * rel_tol * bnorm)
        break;
      for (std::size_t i = 0; i < n; ++i)
        z[i] = inv_diag[i] * r[i];
      const double rz_next = dot(r, z);
      const double beta = rz_next / rz;
      rz = rz_next;
      for (std::size_t i = 0; i < n; ++i)
        p[i] = z[i] + beta * p[i];
    }
    const double previous = rnorm;
    rnorm = true_residual();
    if (!(rnorm < previous))
      break;
  }
  result.relative_residual = rnorm / bnorm;
  result.converged = rnorm <= rel_tol * bnorm;
  return result;
}

} // namespace serrin

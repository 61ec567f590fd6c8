#pragma once

#include <span>
#include <vector>

namespace serrin {

/// Compressed sparse row matrix. Column indices are sorted within a row.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<int> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  /// Pointer to entry (i, j), or nullptr outside the pattern.
  double *find(std::size_t i, int j);
};

struct CgResult {
  int iterations = 0;
  /// ||b - A x|| / ||b||, recomputed from the final iterate.
  double relative_residual = 0.0;
  bool converged = false;
};

/// Preconditioned conjugate gradients for symmetric positive definite A.
/// x holds the initial guess on entry. Operations run in a fixed order,
/// so results are bit-reproducible.
CgResult conjugate_gradient(const CsrMatrix &a, std::span<const double> b, std::span<double> x,
                            double rel_tol, int max_iterations, bool jacobi);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

} // namespace serrin

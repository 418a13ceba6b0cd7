#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace gg {

// Dense row-major matrix of doubles. Sized for the two shapes this library
// works with: tall d-by-N parameter/gradient blocks and small N-by-N systems.
// Construction from explicit entries rejects NaN/Inf.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> data() const { return entries_; }
  std::span<double> data() { return entries_; }

  void copy_column(std::size_t j, std::span<double> out) const;
  void set_column(std::size_t j, std::span<const double> in);

  bool all_finite() const;
  double frobenius_norm() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Eigendecomposition of a symmetric matrix: eigenvalues ascending, column k
// of `eigenvectors` paired with eigenvalue k. Eigenvector signs are fixed so
// the first component of magnitude above 1e-12 is positive.
struct SymEigDecomposition {
  std::size_t dimension = 0;
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;
};

// Entrywise product; shapes must match.
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

// N*I - ones*ones^T for a complete graph on n >= 2 vertices.
DenseMatrix complete_graph_laplacian(std::size_t n);

// Cyclic Jacobi sweeps; input must be square and symmetric within 1e-12
// elementwise (it is symmetrized before iterating to absorb roundoff).
SymEigDecomposition sym_eig(const DenseMatrix& s);

// V diag(1/max(lambda, epsilon)) V^T rhs. Exact solve when all eigenvalues
// are at least epsilon. Eigenvalues below -1e-8*trace(s) indicate the input
// was not PSD and raise NumericError.
std::vector<double> clipped_solve(const DenseMatrix& s, double epsilon,
                                  std::span<const double> rhs);

// Sum of squared distances of the columns from their mean; needs >= 2 columns.
double psi(const DenseMatrix& theta_tilde);

// a^T b for matrices with the same number of rows; result is cols(a) x cols(b).
// The only way d-sized inputs are ever reduced: no d-by-d product exists here.
DenseMatrix gram(const DenseMatrix& a, const DenseMatrix& b);

// (n x n matrix) * (n vector).
std::vector<double> matvec(const DenseMatrix& m, std::span<const double> v);

}  // namespace gg

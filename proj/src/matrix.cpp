#include "gg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gg/error.hpp"

namespace gg {

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) +
                         "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
  }
}

void require_symmetric(const DenseMatrix& s, const char* op) {
  if (s.rows() != s.cols()) {
    throw DimensionError(std::string(op) + ": matrix is not square");
  }
  for (std::size_t i = 0; i < s.rows(); ++i) {
    for (std::size_t j = i + 1; j < s.cols(); ++j) {
      if (std::abs(s(i, j) - s(j, i)) > 1e-12) {
        throw DimensionError(std::string(op) + ": matrix is not symmetric at (" +
                             std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

double off_diagonal_norm(const DenseMatrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("DenseMatrix: entry count " + std::to_string(entries_.size()) +
                         " does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (!all_finite()) {
    throw NumericError("DenseMatrix: non-finite entry");
  }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw DimensionError("DenseMatrix: ragged initializer");
    }
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
  if (!all_finite()) {
    throw NumericError("DenseMatrix: non-finite entry");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::copy_column(std::size_t j, std::span<double> out) const {
  for (std::size_t i = 0; i < rows_; ++i) out[i] = entries_[i * cols_ + j];
}

void DenseMatrix::set_column(std::size_t j, std::span<const double> in) {
  for (std::size_t i = 0; i < rows_; ++i) entries_[i * cols_ + j] = in[i];
}

bool DenseMatrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](double x) { return std::isfinite(x); });
}

double DenseMatrix::frobenius_norm() const {
  double sum = 0.0;
  for (double x : entries_) sum += x * x;
  return std::sqrt(sum);
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "hadamard");
  DenseMatrix out(a.rows(), a.cols());
  auto av = a.data();
  auto bv = b.data();
  auto ov = out.data();
  for (std::size_t k = 0; k < av.size(); ++k) ov[k] = av[k] * bv[k];
  return out;
}

DenseMatrix complete_graph_laplacian(std::size_t n) {
  if (n < 2) {
    throw DimensionError("complete_graph_laplacian: need n >= 2, got " + std::to_string(n));
  }
  DenseMatrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      l(i, j) = (i == j) ? static_cast<double>(n) - 1.0 : -1.0;
    }
  }
  return l;
}

SymEigDecomposition sym_eig(const DenseMatrix& s) {
  require_symmetric(s, "sym_eig");
  const std::size_t n = s.rows();
  if (n == 0) {
    throw DimensionError("sym_eig: empty matrix");
  }

  // Symmetrize to absorb roundoff within the accepted 1e-12 band.
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a(i, j) = 0.5 * (s(i, j) + s(j, i));
    }
  }

  DenseMatrix v = DenseMatrix::identity(n);
  const double target = 1e-14 * std::max(a.frobenius_norm(), 1e-300);
  const int max_sweeps = 100;

  for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) > target; ++sweep) {
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) < 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double sn = t * c;
        double tau = sn / (1.0 + c);

        double app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r != p && r != q) {
            double arp = a(r, p), arq = a(r, q);
            a(r, p) = a(p, r) = arp - sn * (arq + tau * arp);
            a(r, q) = a(q, r) = arq + sn * (arp - tau * arq);
          }
          double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - sn * (vrq + tau * vrp);
          v(r, q) = vrq + sn * (vrp - tau * vrq);
        }
      }
    }
  }

  // Ascending eigenvalue order, then the deterministic sign convention.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return a(x, x) < a(y, y); });

  SymEigDecomposition out;
  out.dimension = n;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    double sign = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      double x = v(i, order[k]);
      if (std::abs(x) > 1e-12) {
        sign = x > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      out.eigenvectors(i, k) = sign * v(i, order[k]);
    }
  }
  return out;
}

std::vector<double> clipped_solve(const DenseMatrix& s, double epsilon,
                                  std::span<const double> rhs) {
  if (epsilon <= 0.0) {
    throw DimensionError("clipped_solve: epsilon must be positive");
  }
  if (rhs.size() != s.rows()) {
    throw DimensionError("clipped_solve: rhs length " + std::to_string(rhs.size()) +
                         " does not match matrix size " + std::to_string(s.rows()));
  }
  SymEigDecomposition eig = sym_eig(s);

  double trace = 0.0;
  for (std::size_t i = 0; i < s.rows(); ++i) trace += s(i, i);
  if (eig.eigenvalues.front() < -1e-8 * std::abs(trace)) {
    throw NumericError("clipped_solve: eigenvalue " + std::to_string(eig.eigenvalues.front()) +
                       " violates positive semidefiniteness");
  }

  const std::size_t n = s.rows();
  std::vector<double> coeffs(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += eig.eigenvectors(i, k) * rhs[i];
    coeffs[k] = dot / std::max(eig.eigenvalues[k], epsilon);
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += eig.eigenvectors(i, k) * coeffs[k];
    x[i] = acc;
  }
  return x;
}

double psi(const DenseMatrix& theta_tilde) {
  if (theta_tilde.cols() < 2) {
    throw DimensionError("psi: need at least 2 columns, got " +
                         std::to_string(theta_tilde.cols()));
  }
  const std::size_t d = theta_tilde.rows();
  const std::size_t n = theta_tilde.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += theta_tilde(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
      double dev = theta_tilde(i, j) - mean;
      total += dev * dev;
    }
  }
  return total;
}

DenseMatrix gram(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("gram: row count mismatch " + std::to_string(a.rows()) + " vs " +
                         std::to_string(b.rows()));
  }
  const std::size_t n = a.cols(), m = b.cols(), d = a.rows();
  DenseMatrix out(n, m);
  for (std::size_t k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double aki = a(k, i);
      for (std::size_t j = 0; j < m; ++j) {
        out(i, j) += aki * b(k, j);
      }
    }
  }
  return out;
}

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> v) {
  if (v.size() != m.cols()) {
    throw DimensionError("matvec: vector length " + std::to_string(v.size()) +
                         " does not match columns " + std::to_string(m.cols()));
  }
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.cols(); ++j) acc += m(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

}  // namespace gg

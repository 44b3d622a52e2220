#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qpa {

using complexd = std::complex<double>;

// Entrywise equality tolerance shared across the library (traces, Hermiticity,
// state comparisons).
inline constexpr double kEqTol = 1e-12;

// Slack for spectral checks: semidefiniteness, unitarity, projector idempotence.
inline constexpr double kSpectralTol = 1e-10;

// Dense complex matrix, row-major. Sized for Hilbert-space dimensions up to 16;
// nothing here is tuned for anything larger.
class ComplexMatrix {
 public:
  ComplexMatrix() = default;

  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols) {}

  ComplexMatrix(std::initializer_list<std::initializer_list<complexd>> rows) {
    rows_ = rows.size();
    cols_ = rows_ != 0 ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) {
        throw std::invalid_argument("ComplexMatrix: ragged initializer");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  complexd& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  const complexd& operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  const std::vector<complexd>& data() const { return data_; }

  ComplexMatrix operator+(const ComplexMatrix& other) const {
    require_same_shape(other, "operator+");
    ComplexMatrix out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] + other.data_[k];
    return out;
  }

  ComplexMatrix operator-(const ComplexMatrix& other) const {
    require_same_shape(other, "operator-");
    ComplexMatrix out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] - other.data_[k];
    return out;
  }

  ComplexMatrix operator*(const ComplexMatrix& other) const {
    if (cols_ != other.rows_) {
      throw std::invalid_argument("ComplexMatrix: shape mismatch in product");
    }
    ComplexMatrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t k = 0; k < cols_; ++k) {
        const complexd aik = (*this)(i, k);
        if (aik == complexd{}) continue;
        for (std::size_t j = 0; j < other.cols_; ++j) {
          out(i, j) += aik * other(k, j);
        }
      }
    }
    return out;
  }

  ComplexMatrix operator*(complexd scalar) const {
    ComplexMatrix out(rows_, cols_);
    for (std::size_t k = 0; k < data_.size(); ++k) out.data_[k] = data_[k] * scalar;
    return out;
  }

  friend ComplexMatrix operator*(complexd scalar, const ComplexMatrix& m) {
    return m * scalar;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < cols_; ++j) {
        out(j, i) = std::conj((*this)(i, j));
      }
    }
    return out;
  }

  complexd trace() const {
    if (!is_square()) throw std::invalid_argument("ComplexMatrix: trace of non-square matrix");
    complexd t{};
    for (std::size_t i = 0; i < rows_; ++i) t += (*this)(i, i);
    return t;
  }

  double max_abs_diff(const ComplexMatrix& other) const {
    require_same_shape(other, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < data_.size(); ++k) {
      m = std::max(m, std::abs(data_[k] - other.data_[k]));
    }
    return m;
  }

  bool approx_equal(const ComplexMatrix& other, double tol = kEqTol) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && max_abs_diff(other) <= tol;
  }

  bool is_hermitian(double tol = kEqTol) const {
    if (!is_square()) return false;
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = i; j < cols_; ++j) {
        if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
      }
    }
    return true;
  }

  bool is_unitary(double tol = kSpectralTol) const {
    if (!is_square()) return false;
    return (adjoint() * (*this)).approx_equal(identity(rows_), tol);
  }

  // P is an orthogonal projector: Hermitian and idempotent.
  bool is_projector(double tol = kSpectralTol) const {
    if (!is_square() || !is_hermitian(tol)) return false;
    return ((*this) * (*this)).approx_equal(*this, tol);
  }

  // Eigenvalues of a Hermitian matrix by cyclic Jacobi with complex plane
  // rotations, ascending. Robust and plenty fast for dimensions up to 16.
  std::vector<double> hermitian_eigenvalues() const {
    if (!is_square()) {
      throw std::invalid_argument("hermitian_eigenvalues: matrix not square");
    }
    if (!is_hermitian(1e-9)) {
      throw std::invalid_argument("hermitian_eigenvalues: matrix not Hermitian");
    }
    ComplexMatrix a = *this;
    const std::size_t n = rows_;
    for (int sweep = 0; sweep < 64; ++sweep) {
      double off = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) off += std::norm(a(i, j));
      }
      if (off < 1e-28) break;
      for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = p + 1; q < n; ++q) {
          const complexd apq = a(p, q);
          const double g = std::abs(apq);
          if (g < 1e-18) continue;
          const complexd phase = apq / g;
          const double app = a(p, p).real();
          const double aqq = a(q, q).real();
          const double t = 0.5 * std::atan2(2.0 * g, app - aqq);
          const double c = std::cos(t);
          const double s = std::sin(t);
          // Plane rotation V = diag(1, e^{-i phi}) * [[c, -s], [s, c]] on the
          // (p, q) plane; A <- V^dagger A V zeroes A(p, q).
          const complexd vpp = c;
          const complexd vpq = -s;
          const complexd vqp = s * std::conj(phase);
          const complexd vqq = c * std::conj(phase);
          for (std::size_t k = 0; k < n; ++k) {
            const complexd akp = a(k, p);
            const complexd akq = a(k, q);
            a(k, p) = akp * vpp + akq * vqp;
            a(k, q) = akp * vpq + akq * vqq;
          }
          for (std::size_t k = 0; k < n; ++k) {
            const complexd apk = a(p, k);
            const complexd aqk = a(q, k);
            a(p, k) = std::conj(vpp) * apk + std::conj(vqp) * aqk;
            a(q, k) = std::conj(vpq) * apk + std::conj(vqq) * aqk;
          }
        }
      }
    }
    std::vector<double> evals(n);
    for (std::size_t i = 0; i < n; ++i) evals[i] = a(i, i).real();
    std::sort(evals.begin(), evals.end());
    return evals;
  }

  double min_eigenvalue() const {
    return hermitian_eigenvalues().front();
  }

 private:
  void require_same_shape(const ComplexMatrix& other, const char* op) const {
    if (rows_ != other.rows_ || cols_ != other.cols_) {
      throw std::invalid_argument(std::string("ComplexMatrix: shape mismatch in ") + op);
    }
  }

  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<complexd> data_;
};

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t ia = 0; ia < a.rows(); ++ia) {
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
      const complexd f = a(ia, ja);
      if (f == complexd{}) continue;
      for (std::size_t ib = 0; ib < b.rows(); ++ib) {
        for (std::size_t jb = 0; jb < b.cols(); ++jb) {
          out(ia * b.rows() + ib, ja * b.cols() + jb) = f * b(ib, jb);
        }
      }
    }
  }
  return out;
}

}  // namespace qpa

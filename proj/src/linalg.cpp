/*
 * Copyright 2026 The rrl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "rrl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rrl {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}

}  // namespace

Vector& Vector::operator+=(const Vector& other) {
  require(size() == other.size(), "vector sizes differ");
  for (std::size_t i = 0; i < size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require(size() == other.size(), "vector sizes differ");
  for (std::size_t i = 0; i < size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Vector& Vector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Vector operator+(Vector a, const Vector& b) { return a += b; }
Vector operator-(Vector a, const Vector& b) { return a -= b; }
Vector operator*(double s, Vector a) { return a *= s; }

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  require(data_.size() == rows_ * cols_, "matrix payload does not match rows*cols");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "ragged matrix initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_columns(const std::vector<Vector>& columns) {
  if (columns.empty()) return {};
  Matrix m(columns.front().size(), columns.size());
  for (std::size_t j = 0; j < columns.size(); ++j) m.set_column(j, columns[j]);
  return m;
}

Vector Matrix::column(std::size_t j) const {
  Vector v(rows_);
  for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Matrix::set_column(std::size_t j, const Vector& v) {
  require(v.size() == rows_, "column length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "matrix shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require(rows_ == other.rows_ && cols_ == other.cols_, "matrix shapes differ");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: sizes differ");
  // Four partial sums so the loop vectorizes without reassociation flags.
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t i = 0;
  const std::size_t n = a.size();
  for (; i + 4 <= n; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  for (; i < n; ++i) s0 += a[i] * b[i];
  return (s0 + s1) + (s2 + s3);
}

double dot(const Vector& a, const Vector& b) { return dot(a.span(), b.span()); }

double norm(std::span<const double> x, Norm p) {
  switch (p) {
    case Norm::l1: {
      double s = 0.0;
      for (double v : x) s += std::abs(v);
      return s;
    }
    case Norm::l2: {
      // Scaled accumulation guards against overflow for large entries.
      double scale = 0.0;
      for (double v : x) scale = std::max(scale, std::abs(v));
      if (scale == 0.0 || !std::isfinite(scale)) return scale;
      double s = 0.0;
      for (double v : x) {
        const double t = v / scale;
        s += t * t;
      }
      return scale * std::sqrt(s);
    }
    case Norm::linf: {
      double m = 0.0;
      for (double v : x) m = std::max(m, std::abs(v));
      return m;
    }
  }
  return 0.0;
}

double norm(const Vector& x, Norm p) { return norm(x.span(), p); }

double frobenius(const Matrix& a) { return norm(a.flat(), Norm::l2); }

bool all_finite(std::span<const double> x) {
  return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

Vector matvec(const Matrix& a, const Vector& x) {
  require(a.cols() == x.size(), "matvec: cols(A) != len(x)");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x.span());
  return y;
}

Vector matvec_t(const Matrix& a, const Vector& x) {
  require(a.rows() == x.size(), "matvec_t: rows(A) != len(x)");
  Vector y(a.cols());
  double* out = y.data();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = a.data() + i * a.cols();
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += xi * row[j];
  }
  return y;
}

namespace {

// C[m x n] += alpha * A[m x k] * B[k x n], all row-major.
void gemm_nn_raw(std::size_t m, std::size_t n, std::size_t k, double alpha,
                 const double* a, const double* b, double* c) {
  constexpr std::size_t kBlock = 256;
  for (std::size_t p0 = 0; p0 < k; p0 += kBlock) {
    const std::size_t p1 = std::min(k, p0 + kBlock);
    for (std::size_t i = 0; i < m; ++i) {
      double* crow = c + i * n;
      const double* arow = a + i * k;
      for (std::size_t p = p0; p < p1; ++p) {
        const double av = alpha * arow[p];
        if (av == 0.0) continue;
        const double* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
      }
    }
  }
}

}  // namespace

Matrix matmul(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  gemm_nn_raw(a.rows(), b.cols(), a.cols(), 1.0, a.data(), b.data(), c.data());
  return c;
}

void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c, double alpha) {
  require(a.rows() == b.rows(), "gemm_tn: inner dimensions differ");
  require(c.rows() == a.cols() && c.cols() == b.cols(), "gemm_tn: output shape");
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a.data() + p * m;
    const double* brow = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = alpha * arow[i];
      if (av == 0.0) continue;
      double* crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  Matrix c(a.cols(), b.cols());
  gemm_tn_acc(a, b, c);
  return c;
}

void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c, double alpha) {
  require(a.cols() == b.cols(), "gemm_nt: inner dimensions differ");
  require(c.rows() == a.rows() && c.cols() == b.rows(), "gemm_nt: output shape");
  const Matrix bt = b.transpose();
  gemm_nn_raw(a.rows(), bt.cols(), a.cols(), alpha, a.data(), bt.data(), c.data());
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.rows());
  gemm_nt_acc(a, b, c);
  return c;
}

Matrix outer(const Vector& a, const Vector& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

double asymmetry(const Matrix& a) {
  require(a.rows() == a.cols(), "asymmetry: matrix not square");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = i + 1; j < a.cols(); ++j)
      worst = std::max(worst, std::abs(a(i, j) - a(j, i)));
  return worst;
}

EigenPair top_eigpair_sym(const SymmetricOperator& op, double tol, int max_iter,
                          std::uint64_t seed) {
  if (op.dim == 0) throw DimensionError("top_eigpair_sym: empty operator");
  std::mt19937_64 gen(seed);
  Vector v(op.dim);
  for (std::size_t i = 0; i < op.dim; ++i)
    v[i] = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
  v *= 1.0 / norm(v, Norm::l2);

  for (int it = 1; it <= max_iter; ++it) {
    Vector w = op.apply(v);
    if (w.size() != op.dim) throw DimensionError("top_eigpair_sym: operator output size");
    const double lambda = dot(v, w);
    Vector residual = w;
    for (std::size_t i = 0; i < op.dim; ++i) residual[i] -= lambda * v[i];
    if (norm(residual, Norm::l2) <= tol * std::max(1.0, std::abs(lambda)))
      return {lambda, v, it};
    const double wn = norm(w, Norm::l2);
    v = (1.0 / wn) * std::move(w);
  }
  throw ConvergenceError("power iteration did not converge in " +
                         std::to_string(max_iter) + " iterations");
}

EigenPair top_eigpair_sym(const Matrix& a, double tol, int max_iter, std::uint64_t seed) {
  require(a.rows() == a.cols(), "top_eigpair_sym: matrix not square");
  if (asymmetry(a) > 1e-10)
    throw std::invalid_argument("top_eigpair_sym: matrix not symmetric");
  SymmetricOperator op{a.rows(), [&a](const Vector& x) { return matvec(a, x); }};
  return top_eigpair_sym(op, tol, max_iter, seed);
}

}  // namespace rrl

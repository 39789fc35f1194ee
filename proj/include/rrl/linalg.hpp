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

#ifndef RRL_LINALG_HPP
#define RRL_LINALG_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrl {

/// Thrown when operand shapes do not chain.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Thrown when an iterative solver exhausts its budget.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense real vector.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> init) : data_(init) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}
  explicit Vector(std::span<const double> values)
      : data_(values.begin(), values.end()) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double s);

  bool operator==(const Vector&) const = default;

 private:
  std::vector<double> data_;
};

Vector operator+(Vector a, const Vector& b);
Vector operator-(Vector a, const Vector& b);
Vector operator*(double s, Vector a);

/// Row-major dense real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
  /// Builds from nested rows; every row must have the same length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix from_columns(const std::vector<Vector>& columns);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> flat() const { return data_; }
  std::span<double> flat() { return data_; }

  Vector column(std::size_t j) const;
  void set_column(std::size_t j, const Vector& v);
  Matrix transpose() const;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s);

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

enum class Norm { l1, l2, linf };

double dot(std::span<const double> a, std::span<const double> b);
double dot(const Vector& a, const Vector& b);
double norm(const Vector& x, Norm p);
double norm(std::span<const double> x, Norm p);
double frobenius(const Matrix& a);
bool all_finite(std::span<const double> x);

/// y = A x
Vector matvec(const Matrix& a, const Vector& x);
/// y = A^T x
Vector matvec_t(const Matrix& a, const Vector& x);

/// C = A B
Matrix matmul(const Matrix& a, const Matrix& b);
/// C = A^T B
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// C = A B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// C += alpha * A^T B   (A: k x m, B: k x n, C: m x n)
void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& c, double alpha = 1.0);
/// C += alpha * A B^T   (A: m x k, B: n x k, C: m x n)
void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& c, double alpha = 1.0);

Matrix outer(const Vector& a, const Vector& b);

/// Largest symmetric residual |A_ij - A_ji|.
double asymmetry(const Matrix& a);

/// Symmetric linear operator given by its action; lets callers run power
/// iteration on a factored Hessian without forming it.
struct SymmetricOperator {
  std::size_t dim = 0;
  std::function<Vector(const Vector&)> apply;
};

struct EigenPair {
  double value = 0.0;
  Vector vector;
  int iterations = 0;
};

/// Largest-magnitude eigenpair by power iteration from a deterministic
/// pseudo-random unit start vector. Converged when
/// ||Av - lambda v||_2 <= tol * max(1, |lambda|).
EigenPair top_eigpair_sym(const SymmetricOperator& op, double tol, int max_iter,
                          std::uint64_t seed = 0x5eed);
EigenPair top_eigpair_sym(const Matrix& a, double tol, int max_iter,
                          std::uint64_t seed = 0x5eed);

}  // namespace rrl

#endif  // RRL_LINALG_HPP

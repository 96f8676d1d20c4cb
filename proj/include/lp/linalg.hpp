#pragma once

// Dense row-major linear algebra used by every LP computation.
//
// All reductions run in ascending index order with plain scalar accumulation,
// so a given input always produces the same bits regardless of which thread
// evaluates it. Multiply-accumulate operations are tallied in a thread-local
// counter (see mac_count()) for cost accounting.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace lp {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

namespace linalg {

/// m·v, each row summed in ascending column order.
Vector matvec(const Matrix& m, std::span<const double> v);

/// mᵀ·v, each output summed in ascending row order.
Vector matvec_transposed(const Matrix& m, std::span<const double> v);

Vector hadamard(std::span<const double> a, std::span<const double> b);

/// a·bᵀ.
Matrix outer(std::span<const double> a, std::span<const double> b);

/// m += s·a·bᵀ.
void add_outer(Matrix& m, double s, std::span<const double> a, std::span<const double> b);

/// y += s·x.
void axpy(double s, std::span<const double> x, std::span<double> y);

/// m += s·other.
void axpy(double s, const Matrix& other, Matrix& m);

Vector scale(double s, std::span<const double> v);
double dot(std::span<const double> a, std::span<const double> b);
double l1_norm(std::span<const double> v);
double l2_norm_sq(std::span<const double> v);
Vector map(std::span<const double> v, const std::function<double(double)>& f);
Matrix transpose(const Matrix& m);

bool all_finite(std::span<const double> v);

/// Multiply-accumulates performed by linalg calls on the current thread.
std::uint64_t mac_count() noexcept;
void reset_mac_count() noexcept;

}  // namespace linalg
}  // namespace lp

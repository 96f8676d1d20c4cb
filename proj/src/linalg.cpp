#include "lp/linalg.hpp"

#include <cmath>
#include <string>

#include "lp/error.hpp"

namespace lp {

namespace {

thread_local std::uint64_t t_macs = 0;

void require(bool ok, const char* op, std::size_t lhs, std::size_t rhs) {
  if (!ok) {
    throw DimensionError(std::string(op) + ": dimension mismatch (" + std::to_string(lhs) + " vs " +
                         std::to_string(rhs) + ")");
  }
}

}  // namespace

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    require(r.size() == cols_, "Matrix", r.size(), cols_);
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t k = 0; k < n; ++k) m(k, k) = 1.0;
  return m;
}

namespace linalg {

Vector matvec(const Matrix& m, std::span<const double> v) {
  require(m.cols() == v.size(), "matvec", m.cols(), v.size());
  Vector out(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    double acc = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) acc += row[c] * v[c];
    out[r] = acc;
  }
  t_macs += m.size();
  return out;
}

Vector matvec_transposed(const Matrix& m, std::span<const double> v) {
  require(m.rows() == v.size(), "matvec_transposed", m.rows(), v.size());
  Vector out(m.cols(), 0.0);
  // Row-major sweep; out[c] still accumulates rows in ascending order.
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    const double s = v[r];
    for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * s;
  }
  t_macs += m.size();
  return out;
}

Vector hadamard(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "hadamard", a.size(), b.size());
  Vector out(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
  return out;
}

Matrix outer(std::span<const double> a, std::span<const double> b) {
  Matrix m(a.size(), b.size());
  add_outer(m, 1.0, a, b);
  return m;
}

void add_outer(Matrix& m, double s, std::span<const double> a, std::span<const double> b) {
  require(m.rows() == a.size(), "add_outer", m.rows(), a.size());
  require(m.cols() == b.size(), "add_outer", m.cols(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r) {
    const double sa = s * a[r];
    auto row = m.row(r);
    for (std::size_t c = 0; c < b.size(); ++c) row[c] += sa * b[c];
  }
  t_macs += m.size();
}

void axpy(double s, std::span<const double> x, std::span<double> y) {
  require(x.size() == y.size(), "axpy", x.size(), y.size());
  for (std::size_t k = 0; k < x.size(); ++k) y[k] += s * x[k];
  t_macs += x.size();
}

void axpy(double s, const Matrix& other, Matrix& m) {
  require(other.rows() == m.rows() && other.cols() == m.cols(), "axpy", other.size(), m.size());
  axpy(s, other.data(), m.data());
}

Vector scale(double s, std::span<const double> v) {
  Vector out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = s * v[k];
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot", a.size(), b.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  t_macs += a.size();
  return acc;
}

double l1_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc;
}

double l2_norm_sq(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

Vector map(std::span<const double> v, const std::function<double(double)>& f) {
  Vector out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = f(v[k]);
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  return t;
}

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

std::uint64_t mac_count() noexcept { return t_macs; }
void reset_mac_count() noexcept { t_macs = 0; }

}  // namespace linalg
}  // namespace lp

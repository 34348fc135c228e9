#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <vector>

#include "abdiv/scalar.hpp"

namespace abdiv {

/// Upper bound on the number of cells any factor may hold (default 2^26).
std::size_t cell_cap() noexcept;
void set_cell_cap(std::size_t cap) noexcept;

/// Restores the previous cell cap on destruction.
class ScopedCellCap {
 public:
  explicit ScopedCellCap(std::size_t cap) : previous_(cell_cap()) { set_cell_cap(cap); }
  ~ScopedCellCap() { set_cell_cap(previous_); }
  ScopedCellCap(const ScopedCellCap&) = delete;
  ScopedCellCap& operator=(const ScopedCellCap&) = delete;

 private:
  std::size_t previous_;
};

/// Number of cells for the given cardinalities; throws TableTooLarge above the
/// cell cap.
std::size_t checked_table_size(std::span<const int> cardinalities);

/// Dense table over an ascending list of variable ids. Values are row-major:
/// the variable with the largest id varies fastest.
///
/// Values are finite, except that log-domain factors may hold -inf.
/// Instantiated for double and Quad.
template <typename T>
class BasicFactor {
 public:
  using Scalar = T;
  using Values = Eigen::Array<T, Eigen::Dynamic, 1>;

  /// Scalar factor with value 1.
  BasicFactor();
  BasicFactor(std::vector<int> scope, std::vector<int> cardinalities, Values values,
              bool log_domain = false);

  static BasicFactor scalar(T value);
  static BasicFactor constant(std::vector<int> scope, std::vector<int> cardinalities, T value);
  /// Builds a factor from a table laid out row-major over `variables` in the
  /// given (arbitrary) order, permuting into canonical ascending order.
  static BasicFactor from_ordered(std::span<const int> variables,
                                  std::span<const int> cardinalities, std::span<const T> values);

  const std::vector<int>& scope() const noexcept { return scope_; }
  const std::vector<int>& cardinalities() const noexcept { return cards_; }
  const std::vector<std::size_t>& strides() const noexcept { return strides_; }
  const Values& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  bool log_domain() const noexcept { return log_domain_; }

  bool contains(int variable) const;
  int cardinality_of(int variable) const;

  /// Flat index for an assignment indexed by variable id (covering at least
  /// this factor's scope).
  std::size_t index_of(std::span<const int> full_assignment) const;
  T at(std::span<const int> full_assignment) const {
    return values_[static_cast<Eigen::Index>(index_of(full_assignment))];
  }
  T operator[](std::size_t flat) const { return values_[static_cast<Eigen::Index>(flat)]; }

  /// Per-scope-variable values for a flat index.
  std::vector<int> local_assignment(std::size_t flat) const;

  T sum() const { return values_.sum(); }

  /// Re-expresses the table in an arbitrary variable order (row-major there).
  std::vector<T> to_ordered(std::span<const int> variables) const;

  /// Same table in another scalar type.
  template <typename U>
  BasicFactor<U> cast() const {
    return BasicFactor<U>(scope_, cards_, values_.template cast<U>(), log_domain_);
  }

 private:
  std::vector<int> scope_;
  std::vector<int> cards_;
  std::vector<std::size_t> strides_;
  Values values_;
  bool log_domain_ = false;
};

using Factor = BasicFactor<double>;
using QuadFactor = BasicFactor<Quad>;

/// Product over the union scope. Throws TableTooLarge.
template <typename T>
BasicFactor<T> multiply(const BasicFactor<T>& a, const BasicFactor<T>& b);
template <typename T>
BasicFactor<T> operator*(const BasicFactor<T>& a, const BasicFactor<T>& b) {
  return multiply(a, b);
}

/// Sum over every scope variable not in `keep`; `keep` must be a subset of the
/// scope. Cells are accumulated in ascending flat-index order.
template <typename T>
BasicFactor<T> marginalize(const BasicFactor<T>& a, std::span<const int> keep);

/// Elementwise a / b with b.scope contained in a.scope and 0/0 := 0. Throws
/// DivisionByZero when a nonzero cell meets a zero divisor.
template <typename T>
BasicFactor<T> divide(const BasicFactor<T>& a, const BasicFactor<T>& b);

/// value^e per cell with 0^0 := 1. Throws NegativePowerOfZero.
template <typename T>
BasicFactor<T> elementwise_power(const BasicFactor<T>& a, double exponent);

/// Natural log per cell, log 0 := -inf; the result is flagged log-domain.
/// Throws NegativeInput.
template <typename T>
BasicFactor<T> elementwise_log(const BasicFactor<T>& a);

/// |value| per cell.
template <typename T>
BasicFactor<T> elementwise_abs(const BasicFactor<T>& a);

/// Sum over the common scope of a(x) * b(x); scopes must be equal.
template <typename T>
T dot(const BasicFactor<T>& a, const BasicFactor<T>& b);

}  // namespace abdiv

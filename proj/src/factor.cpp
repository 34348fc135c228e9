#include "abdiv/factor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "abdiv/error.hpp"
#include "abdiv/graph.hpp"

namespace abdiv {

namespace {

std::atomic<std::size_t> g_cell_cap{std::size_t{1} << 26};

std::vector<std::size_t> row_major_strides(std::span<const int> cards) {
  std::vector<std::size_t> strides(cards.size());
  std::size_t s = 1;
  for (std::size_t i = cards.size(); i-- > 0;) {
    strides[i] = s;
    s *= static_cast<std::size_t>(cards[i]);
  }
  return strides;
}

// Strides of `f` aligned to the variables of `scope` (0 where f lacks the
// variable).
template <typename T>
std::vector<std::size_t> aligned_strides(const BasicFactor<T>& f, std::span<const int> scope) {
  std::vector<std::size_t> out(scope.size(), 0);
  std::size_t j = 0;
  for (std::size_t i = 0; i < scope.size() && j < f.scope().size(); ++i) {
    if (f.scope()[j] == scope[i]) out[i] = f.strides()[j++];
  }
  return out;
}

// Walks every cell of a table over `cards` in row-major order, calling
// visit(out_index, index_a, index_b) with incrementally maintained offsets.
template <typename Visit>
void odometer(std::span<const int> cards, std::span<const std::size_t> stride_a,
              std::span<const std::size_t> stride_b, std::size_t total, Visit&& visit) {
  const std::size_t k = cards.size();
  std::vector<int> counter(k, 0);
  std::size_t ia = 0;
  std::size_t ib = 0;
  for (std::size_t i = 0; i < total; ++i) {
    visit(i, ia, ib);
    for (std::size_t d = k; d-- > 0;) {
      if (++counter[d] < cards[d]) {
        ia += stride_a[d];
        ib += stride_b[d];
        break;
      }
      counter[d] = 0;
      ia -= static_cast<std::size_t>(cards[d] - 1) * stride_a[d];
      ib -= static_cast<std::size_t>(cards[d] - 1) * stride_b[d];
    }
  }
}

template <typename T>
void union_scope(const BasicFactor<T>& a, const BasicFactor<T>& b, std::vector<int>& scope,
                 std::vector<int>& cards) {
  scope = sorted_union(a.scope(), b.scope());
  cards.resize(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    cards[i] = a.contains(scope[i]) ? a.cardinality_of(scope[i]) : b.cardinality_of(scope[i]);
    if (a.contains(scope[i]) && b.contains(scope[i]) &&
        a.cardinality_of(scope[i]) != b.cardinality_of(scope[i])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "cardinality mismatch for variable " + std::to_string(scope[i]));
    }
  }
}

}  // namespace

std::size_t cell_cap() noexcept { return g_cell_cap.load(); }
void set_cell_cap(std::size_t cap) noexcept { g_cell_cap.store(cap); }

std::size_t checked_table_size(std::span<const int> cardinalities) {
  const std::size_t cap = cell_cap();
  std::size_t total = 1;
  for (int c : cardinalities) {
    if (c < 1) throw Error(ErrorKind::kInvalidArgument, "cardinality must be positive");
    if (total > cap / static_cast<std::size_t>(c)) {
      throw Error(ErrorKind::kTableTooLarge,
                  "table exceeds cell cap of " + std::to_string(cap) + " cells");
    }
    total *= static_cast<std::size_t>(c);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Factor

template <typename T>
BasicFactor<T>::BasicFactor() : values_(Values::Ones(1)) {}

template <typename T>
BasicFactor<T>::BasicFactor(std::vector<int> scope, std::vector<int> cardinalities, Values values,
                            bool log_domain)
    : scope_(std::move(scope)),
      cards_(std::move(cardinalities)),
      values_(std::move(values)),
      log_domain_(log_domain) {
  if (scope_.size() != cards_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "scope and cardinalities differ in length");
  }
  for (std::size_t i = 1; i < scope_.size(); ++i) {
    if (scope_[i - 1] >= scope_[i]) {
      throw Error(ErrorKind::kInvalidArgument, "factor scope must be strictly ascending");
    }
  }
  std::size_t expected = 1;
  for (int c : cards_) {
    if (c < 1) throw Error(ErrorKind::kInvalidArgument, "cardinality must be positive");
    expected *= static_cast<std::size_t>(c);
  }
  if (static_cast<std::size_t>(values_.size()) != expected) {
    throw Error(ErrorKind::kInvalidArgument,
                "factor has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(expected));
  }
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    const T v = values_[i];
    if (v != v) throw Error(ErrorKind::kInvalidArgument, "NaN in factor table");
    if (!is_finite_value(v) && (v > T(0) || !log_domain_)) {
      throw Error(ErrorKind::kInvalidArgument, "infinite value in factor table");
    }
  }
  strides_ = row_major_strides(cards_);
}

template <typename T>
BasicFactor<T> BasicFactor<T>::scalar(T value) {
  return BasicFactor({}, {}, Values::Constant(1, value));
}

template <typename T>
BasicFactor<T> BasicFactor<T>::constant(std::vector<int> scope, std::vector<int> cardinalities,
                                        T value) {
  const std::size_t n = checked_table_size(cardinalities);
  return BasicFactor(std::move(scope), std::move(cardinalities),
                     Values::Constant(static_cast<Eigen::Index>(n), value));
}

template <typename T>
BasicFactor<T> BasicFactor<T>::from_ordered(std::span<const int> variables,
                                            std::span<const int> cardinalities,
                                            std::span<const T> values) {
  if (variables.size() != cardinalities.size()) {
    throw Error(ErrorKind::kInvalidArgument, "variables and cardinalities differ in length");
  }
  std::vector<std::size_t> perm(variables.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return variables[a] < variables[b]; });
  std::vector<int> scope;
  std::vector<int> cards;
  for (std::size_t i : perm) {
    if (!scope.empty() && scope.back() == variables[i]) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate variable in factor scope");
    }
    scope.push_back(variables[i]);
    cards.push_back(cardinalities[i]);
  }
  const std::size_t total = checked_table_size(cards);
  if (values.size() != total) {
    throw Error(ErrorKind::kInvalidArgument,
                "table has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(total));
  }
  // Walk the source layout; map each source cell to its canonical index.
  auto canonical = row_major_strides(cards);
  std::vector<std::size_t> src_to_canonical(variables.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos) src_to_canonical[perm[pos]] = canonical[pos];
  std::vector<std::size_t> zero(variables.size(), 0);
  Values out(static_cast<Eigen::Index>(total));
  odometer(cardinalities, src_to_canonical, zero, total,
           [&](std::size_t i, std::size_t ia, std::size_t) {
             out[static_cast<Eigen::Index>(ia)] = values[i];
           });
  return BasicFactor(std::move(scope), std::move(cards), std::move(out));
}

template <typename T>
bool BasicFactor<T>::contains(int variable) const {
  return std::binary_search(scope_.begin(), scope_.end(), variable);
}

template <typename T>
int BasicFactor<T>::cardinality_of(int variable) const {
  auto it = std::lower_bound(scope_.begin(), scope_.end(), variable);
  if (it == scope_.end() || *it != variable) {
    throw Error(ErrorKind::kInvalidArgument, "variable " + std::to_string(variable) + " not in scope");
  }
  return cards_[static_cast<std::size_t>(it - scope_.begin())];
}

template <typename T>
std::size_t BasicFactor<T>::index_of(std::span<const int> full_assignment) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    const int var = scope_[i];
    if (static_cast<std::size_t>(var) >= full_assignment.size()) {
      throw Error(ErrorKind::kInvalidArgument, "assignment does not cover factor scope");
    }
    const int value = full_assignment[static_cast<std::size_t>(var)];
    if (value < 0 || value >= cards_[i]) {
      throw Error(ErrorKind::kOutOfDomainValue,
                  "value " + std::to_string(value) + " out of domain for variable " +
                      std::to_string(var));
    }
    idx += static_cast<std::size_t>(value) * strides_[i];
  }
  return idx;
}

template <typename T>
std::vector<int> BasicFactor<T>::local_assignment(std::size_t flat) const {
  std::vector<int> out(scope_.size());
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    out[i] = static_cast<int>((flat / strides_[i]) % static_cast<std::size_t>(cards_[i]));
  }
  return out;
}

template <typename T>
std::vector<T> BasicFactor<T>::to_ordered(std::span<const int> variables) const {
  if (variables.size() != scope_.size()) {
    throw Error(ErrorKind::kInvalidArgument, "ordering must list every scope variable once");
  }
  std::vector<int> cards(variables.size());
  std::vector<std::size_t> strides(variables.size());
  for (std::size_t i = 0; i < variables.size(); ++i) {
    auto it = std::lower_bound(scope_.begin(), scope_.end(), variables[i]);
    if (it == scope_.end() || *it != variables[i]) {
      throw Error(ErrorKind::kInvalidArgument, "ordering mentions a variable outside the scope");
    }
    const auto pos = static_cast<std::size_t>(it - scope_.begin());
    cards[i] = cards_[pos];
    strides[i] = strides_[pos];
  }
  std::vector<std::size_t> zero(variables.size(), 0);
  std::vector<T> out(size());
  odometer(cards, strides, zero, size(), [&](std::size_t i, std::size_t ia, std::size_t) {
    out[i] = values_[static_cast<Eigen::Index>(ia)];
  });
  return out;
}

// ---------------------------------------------------------------------------
// Algebra

template <typename T>
BasicFactor<T> multiply(const BasicFactor<T>& a, const BasicFactor<T>& b) {
  std::vector<int> scope;
  std::vector<int> cards;
  union_scope(a, b, scope, cards);
  const std::size_t total = checked_table_size(cards);
  const auto sa = aligned_strides(a, scope);
  const auto sb = aligned_strides(b, scope);
  typename BasicFactor<T>::Values out(static_cast<Eigen::Index>(total));
  const auto& va = a.values();
  const auto& vb = b.values();
  odometer(cards, sa, sb, total, [&](std::size_t i, std::size_t ia, std::size_t ib) {
    out[static_cast<Eigen::Index>(i)] =
        va[static_cast<Eigen::Index>(ia)] * vb[static_cast<Eigen::Index>(ib)];
  });
  return BasicFactor<T>(std::move(scope), std::move(cards), std::move(out),
                a.log_domain() || b.log_domain());
}

template <typename T>
BasicFactor<T> marginalize(const BasicFactor<T>& a, std::span<const int> keep) {
  std::vector<int> kept(keep.begin(), keep.end());
  std::sort(kept.begin(), kept.end());
  kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
  if (!is_sorted_subset(kept, a.scope())) {
    throw Error(ErrorKind::kInvalidArgument, "marginalize: keep set is not within the scope");
  }
  if (kept.size() == a.scope().size()) return a;

  std::vector<int> cards;
  for (int v : kept) cards.push_back(a.cardinality_of(v));
  const auto kept_strides = row_major_strides(cards);
  std::vector<std::size_t> so(a.scope().size(), 0);
  for (std::size_t i = 0, j = 0; i < a.scope().size() && j < kept.size(); ++i) {
    if (a.scope()[i] == kept[j]) so[i] = kept_strides[j++];
  }
  const std::size_t out_size = cards.empty() ? 1 : kept_strides[0] * static_cast<std::size_t>(cards[0]);
  std::vector<std::size_t> zero(a.scope().size(), 0);
  typename BasicFactor<T>::Values acc = BasicFactor<T>::Values::Zero(static_cast<Eigen::Index>(out_size));
  const auto& va = a.values();
  odometer(a.cardinalities(), so, zero, a.size(), [&](std::size_t i, std::size_t io, std::size_t) {
    acc[static_cast<Eigen::Index>(io)] += va[static_cast<Eigen::Index>(i)];
  });
  return BasicFactor<T>(std::move(kept), std::move(cards), std::move(acc), a.log_domain());
}

template <typename T>
BasicFactor<T> divide(const BasicFactor<T>& a, const BasicFactor<T>& b) {
  if (!is_sorted_subset(b.scope(), a.scope())) {
    throw Error(ErrorKind::kInvalidArgument, "divide: divisor scope must be within the dividend scope");
  }
  const auto sb = aligned_strides(b, a.scope());
  std::vector<std::size_t> zero(a.scope().size(), 0);
  typename BasicFactor<T>::Values out(static_cast<Eigen::Index>(a.size()));
  const auto& va = a.values();
  const auto& vb = b.values();
  odometer(a.cardinalities(), sb, zero, a.size(), [&](std::size_t i, std::size_t ib, std::size_t) {
    const T num = va[static_cast<Eigen::Index>(i)];
    const T den = vb[static_cast<Eigen::Index>(ib)];
    if (den == T(0)) {
      if (num != T(0)) throw Error(ErrorKind::kDivisionByZero, "nonzero cell divided by zero");
      out[static_cast<Eigen::Index>(i)] = T(0);
    } else {
      out[static_cast<Eigen::Index>(i)] = num / den;
    }
  });
  return BasicFactor<T>(a.scope(), a.cardinalities(), std::move(out));
}

template <typename T>
BasicFactor<T> elementwise_power(const BasicFactor<T>& a, double exponent) {
  if (a.log_domain()) throw Error(ErrorKind::kInvalidArgument, "power of a log-domain factor");
  using Values = typename BasicFactor<T>::Values;
  if (exponent == 0.0) return BasicFactor<T>(a.scope(), a.cardinalities(), Values::Ones(a.values().size()));
  if (exponent == 1.0) return a;
  if ((a.values() < T(0)).any()) {
    throw Error(ErrorKind::kNegativeInput, "power of a negative table entry");
  }
  if (exponent < 0.0 && (a.values() == T(0)).any()) {
    throw Error(ErrorKind::kNegativePowerOfZero,
                "zero cell raised to negative exponent " + std::to_string(exponent));
  }
  Values out(a.values().size());
  const T e = static_cast<T>(exponent);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = scalar_pow(a.values()[i], e);
  return BasicFactor<T>(a.scope(), a.cardinalities(), std::move(out));
}

template <typename T>
BasicFactor<T> elementwise_log(const BasicFactor<T>& a) {
  if (a.log_domain()) throw Error(ErrorKind::kInvalidArgument, "log of a log-domain factor");
  if ((a.values() < T(0)).any()) throw Error(ErrorKind::kNegativeInput, "log of a negative table entry");
  typename BasicFactor<T>::Values out(a.values().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const T v = a.values()[i];
    out[i] = v == T(0) ? negative_infinity<T>() : scalar_log(v);
  }
  return BasicFactor<T>(a.scope(), a.cardinalities(), std::move(out), true);
}

template <typename T>
BasicFactor<T> elementwise_abs(const BasicFactor<T>& a) {
  typename BasicFactor<T>::Values out(a.values().size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = scalar_abs(a.values()[i]);
  return BasicFactor<T>(a.scope(), a.cardinalities(), std::move(out), a.log_domain());
}

template <typename T>
T dot(const BasicFactor<T>& a, const BasicFactor<T>& b) {
  if (a.scope() != b.scope()) throw Error(ErrorKind::kInvalidArgument, "dot: scopes differ");
  return (a.values() * b.values()).sum();
}

#define ABDIV_INSTANTIATE_FACTOR(T)                                                    \
  template class BasicFactor<T>;                                                       \
  template BasicFactor<T> multiply(const BasicFactor<T>&, const BasicFactor<T>&);      \
  template BasicFactor<T> marginalize(const BasicFactor<T>&, std::span<const int>);    \
  template BasicFactor<T> divide(const BasicFactor<T>&, const BasicFactor<T>&);        \
  template BasicFactor<T> elementwise_power(const BasicFactor<T>&, double);            \
  template BasicFactor<T> elementwise_log(const BasicFactor<T>&);                      \
  template BasicFactor<T> elementwise_abs(const BasicFactor<T>&);                      \
  template T dot(const BasicFactor<T>&, const BasicFactor<T>&);

ABDIV_INSTANTIATE_FACTOR(double)
ABDIV_INSTANTIATE_FACTOR(Quad)
ABDIV_INSTANTIATE_FACTOR(Mp)

}  // namespace abdiv

#include "abdiv/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <utility>

#include "abdiv/error.hpp"
#include "abdiv/functional.hpp"

namespace abdiv {

DivergenceCase classify(AlphaBeta ab) {
  if (!std::isfinite(ab.alpha) || !std::isfinite(ab.beta)) {
    throw Error(ErrorKind::kInvalidArgument, "alpha and beta must be finite");
  }
  const double a = ab.alpha;
  const double b = ab.beta;
  if (a == 0.0 && b == 0.0) return DivergenceCase::kBothZero;
  if (a == 0.0) return DivergenceCase::kAlphaZero;
  if (b == 0.0) return DivergenceCase::kBetaZero;
  if (a + b == 0.0) return DivergenceCase::kOpposite;
  return DivergenceCase::kGeneral;
}

namespace {

// Target rounding error relative to max(1, |D|).
constexpr double kLog2Target = -45.0;
constexpr unsigned kMaxBits = 1u << 16;

template <typename T>
T domain_size(const VariableTable& vars) {
  T total = 1;
  for (int v = 0; v < vars.size(); ++v) total *= T(vars.cardinality(v));
  return total;
}

template <typename T>
Tracked<T> assemble(DivergenceCase kind, const ComputationGraph& cg, const DecomposableModel& p,
                    const DecomposableModel& q, AlphaBeta ab) {
  if (kind == DivergenceCase::kBothZero) return f1_tracked<T>(p, q);
  const T a = ab.alpha;
  const T b = ab.beta;
  const double alpha = ab.alpha;
  const double beta = ab.beta;
  auto f2t = [&](double x, double y) { return f2_tracked<T>(cg, p, q, x, y); };
  auto f3t = [&](double x, double y, double z, double w) {
    return f3_tracked<T>(cg, p, q, x, y, z, w);
  };
  // sum_i c_i t_i / divisor with the matching magnitude.
  auto combine = [](std::initializer_list<std::pair<T, Tracked<T>>> terms, T extra, T divisor) {
    Tracked<T> out{extra, scalar_abs(extra)};
    for (const auto& [c, t] : terms) {
      out.value += c * t.value;
      out.magnitude += scalar_abs(c) * t.magnitude;
    }
    return Tracked<T>{out.value / divisor, out.magnitude / scalar_abs(divisor)};
  };
  switch (kind) {
    case DivergenceCase::kGeneral: {
      const T s = a + b;
      const double sum = alpha + beta;
      return combine({{T(1), f2t(alpha, beta)}, {-a / s, f2t(sum, 0.0)}, {-b / s, f2t(0.0, sum)}},
                     T(0), -(a * b));
    }
    case DivergenceCase::kBetaZero:
      return combine({{T(1), f3t(alpha, 0.0, alpha, -alpha)},
                      {T(-1), f2t(alpha, 0.0)},
                      {T(1), f2t(0.0, alpha)}},
                     T(0), a * a);
    case DivergenceCase::kOpposite:
      // The reciprocal-ratio term sum_x P^a / Q^a is f2(a, -a).
      return combine({{T(1), f3t(0.0, 0.0, -alpha, alpha)}, {T(1), f2t(alpha, -alpha)}},
                     -domain_size<T>(p.vars()), a * a);
    case DivergenceCase::kAlphaZero:
      return combine({{T(1), f3t(0.0, beta, -beta, beta)},
                      {T(-1), f2t(0.0, beta)},
                      {T(1), f2t(beta, 0.0)}},
                     T(0), b * b);
    case DivergenceCase::kBothZero:
      break;
  }
  return {};
}

template <typename T>
double log2_of(const T& x) {
  return static_cast<double>(scalar_log(x) / scalar_log(T(2)));
}

// Bits of precision the bound asks for, or 0 when `r` already meets the target.
template <typename T>
unsigned bits_needed(const Tracked<T>& r, double log2_kappa) {
  if (!is_finite_value(r.value) || !is_finite_value(r.magnitude)) return 256;
  if (r.magnitude == T(0)) return 0;
  const T scale = std::max(T(1), scalar_abs(r.value));
  const double slack = log2_of(scale) + kLog2Target - log2_kappa - log2_of(r.magnitude);
  if (log2_epsilon<T>() <= slack) return 0;
  return static_cast<unsigned>(std::ceil(-slack)) + 16;
}

}  // namespace

double alpha_beta_divergence(const DecomposableModel& p, const DecomposableModel& q, AlphaBeta ab) {
  const DivergenceCase kind = classify(ab);
  const ComputationGraph cg = build_computation_graph(p, q);
  const auto cards = p.vars().cardinalities();
  const double log2_kappa = std::log2(rounding_factor(cg, cards) +
                                      2.0 * (p.num_cliques() + q.num_cliques()) *
                                          (p.num_cliques() + q.num_cliques()));

  const Tracked<Quad> quad = assemble<Quad>(kind, cg, p, q, ab);
  unsigned bits = bits_needed(quad, log2_kappa);
  if (bits == 0) return static_cast<double>(quad.value);
  for (;;) {
    const ScopedMpPrecision precision(bits);
    const Tracked<Mp> r = assemble<Mp>(kind, cg, p, q, ab);
    const unsigned more = bits_needed(r, log2_kappa);
    if (more == 0 || bits >= kMaxBits) return static_cast<double>(r.value);
    bits = std::min(kMaxBits, std::max(2 * bits, more));
  }
}

AlphaBeta parameters_of(NamedDivergence name) {
  switch (name) {
    case NamedDivergence::kKl: return {1.0, 0.0};
    case NamedDivergence::kReverseKl: return {0.0, 1.0};
    case NamedDivergence::kSquaredLog: return {0.0, 0.0};
  }
  return {0.0, 0.0};
}

NamedDivergence parse_named_divergence(const std::string& name) {
  if (name == "kl") return NamedDivergence::kKl;
  if (name == "reverse_kl") return NamedDivergence::kReverseKl;
  if (name == "squared_log") return NamedDivergence::kSquaredLog;
  throw Error(ErrorKind::kInvalidArgument, "unknown divergence '" + name + "'");
}

double named_divergence(const DecomposableModel& p, const DecomposableModel& q, NamedDivergence name) {
  return alpha_beta_divergence(p, q, parameters_of(name));
}

std::vector<AlphaBeta> default_grid() {
  static constexpr double kValues[] = {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  std::vector<AlphaBeta> grid;
  for (double a : kValues) {
    for (double b : kValues) grid.push_back({a, b});
  }
  return grid;
}

}  // namespace abdiv

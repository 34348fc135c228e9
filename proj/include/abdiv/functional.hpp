#pragma once

#include <span>
#include <variant>
#include <vector>

#include "abdiv/junction_tree.hpp"
#include "abdiv/model.hpp"

namespace abdiv {

/// Chordal supergraph of both model graphs with clique and tree mappings.
struct ComputationGraph {
  UndirectedGraph graph;
  JunctionForest forest;
  /// For each clique of P (resp. Q), the lexicographically smallest clique of
  /// `graph` that contains it.
  std::vector<int> alpha_p;
  std::vector<int> alpha_q;
  /// Tree of `forest` holding alpha_p[i] (resp. alpha_q[i]).
  std::vector<int> tau_p;
  std::vector<int> tau_q;

  const CliqueSet& cliques() const noexcept { return forest.cliques(); }
};

/// Throws VariableMismatch when the models are over different variables.
ComputationGraph build_computation_graph(const DecomposableModel& p, const DecomposableModel& q);

/// g*/h* applied to one clique factor D^jt_C: either D^jt_C raised to a power
/// or the constant base^exponent.
struct PowerTransform {
  double exponent = 1.0;
};
struct ConstantTransform {
  double exponent = 0.0;
  double base = 2.718281828459045;
};
using InnerTransform = std::variant<PowerTransform, ConstantTransform>;

struct NaturalLog {};
struct LogBase {
  double base = 2.0;
};
using OuterLog = std::variant<NaturalLog, LogBase>;

/// Parameters of
///   F(P, Q) = sum_x P(x)^g_exp Q(x)^h_exp L(g*[P](x) h*[Q](x))
/// where g*[P](x) = prod_C g*[P^jt_C](x_C) and likewise for Q.
///
/// `g_star` / `h_star` hold either a single transform shared by every clique
/// or one transform per clique of the respective model.
struct FunctionalSpec {
  double g_exp = 1.0;
  double h_exp = 0.0;
  std::vector<InnerTransform> g_star{PowerTransform{0.0}};
  std::vector<InnerTransform> h_star{PowerTransform{0.0}};
  OuterLog outer = NaturalLog{};
};

/// Throws InvalidArgument for malformed transforms or log bases.
void validate(const FunctionalSpec& spec, const DecomposableModel& p, const DecomposableModel& q);

/// Calibrates (in Quad) the computation graph's forest with P^jt_C^g_exp assigned to
/// alpha_p(C) and Q^jt_C^h_exp assigned to alpha_q(C). Throws
/// NegativePowerOfZero.
Calibration compute_sp_beliefs(const ComputationGraph& cg, const FunctionalSpec& spec,
                               const DecomposableModel& p, const DecomposableModel& q);

/// Evaluates F from calibrated beliefs:
///   sum_C R_tau(C) sum_{x in X_alpha(C)} L(g*[P^jt_C](x)) beta_alpha(C)(x) + (Q side)
/// with R_t the product of the other trees' belief totals and the convention
/// 0 * (+-inf) = 0. Throws LogOfZeroOnSupport.
double evaluate_F(const ComputationGraph& cg, const FunctionalSpec& spec,
                  const DecomposableModel& p, const DecomposableModel& q);

/// F together with the calibration it was read from.
struct FunctionalResult {
  double value = 0.0;
  Calibration calibration;
};
FunctionalResult evaluate_F_detailed(const ComputationGraph& cg, const FunctionalSpec& spec,
                                     const DecomposableModel& p, const DecomposableModel& q);
/// A value with the sum of the absolute values of the terms accumulated into
/// it. Computed in T with unit roundoff u, the value is within
/// u * rounding_factor * magnitude of the exact result for the given inputs.
template <typename T>
struct Tracked {
  T value = 0;
  T magnitude = 0;
};

/// Error growth constant for evaluations on `cg`.
double rounding_factor(const ComputationGraph& cg, std::span<const int> cardinalities);

/// F in T (instantiated for Quad and Mp).
template <typename T>
Tracked<T> evaluate_tracked(const ComputationGraph& cg, const FunctionalSpec& spec,
                            const DecomposableModel& p, const DecomposableModel& q);

/// Spec that turns F into sum_x P^a Q^b: per-clique constants e^{1/(2|C_P|)}
/// and e^{1/(2|C_Q|)} whose logs add up to exactly one.
FunctionalSpec f2_spec(const DecomposableModel& p, const DecomposableModel& q, double a, double b);
/// Spec that turns F into sum_x P^a Q^b log(P^c Q^d).
FunctionalSpec f3_spec(double a, double b, double c, double d);

/// The two routes to f2: F under the constant-telescoping spec, and the
/// product of per-tree belief totals.
struct F2Paths {
  double telescoping = 0.0;
  double belief_product = 0.0;
};
F2Paths f2_paths(const DecomposableModel& p, const DecomposableModel& q, double a, double b);

/// sum_x P(x)^a Q(x)^b. Throws NegativePowerOfZero, and InvalidArgument if
/// the two routes disagree beyond 1e-9 relative.
double f2(const DecomposableModel& p, const DecomposableModel& q, double a, double b);
template <typename T>
Tracked<T> f2_tracked(const ComputationGraph& cg, const DecomposableModel& p,
                      const DecomposableModel& q, double a, double b);

/// sum_x P(x)^a Q(x)^b log(P(x)^c Q(x)^d). Throws LogOfZeroOnSupport,
/// NegativePowerOfZero.
double f3(const DecomposableModel& p, const DecomposableModel& q, double a, double b, double c,
          double d);
template <typename T>
Tracked<T> f3_tracked(const ComputationGraph& cg, const DecomposableModel& p,
                      const DecomposableModel& q, double a, double b, double c, double d);

/// Signed pairwise sums sum_x log D1(x) log D2(x) for the three model pairings.
struct LogQuadraticTerms {
  double pp = 0.0;  // sum_x (log P)^2
  double qq = 0.0;  // sum_x (log Q)^2
  double pq = 0.0;  // sum_x log P log Q
};
/// Expands log P(x) = sum_C log P_C - sum_S log P_S and evaluates every
/// clique/separator pair (B, D) as
///   |X_{X-(B∪D)}| * sum_{x_{B∩D}} (sum_{B-D} log f_B)(sum_{D-B} log f_D).
/// Throws LogOfZero.
LogQuadraticTerms log_quadratic_terms(const DecomposableModel& p, const DecomposableModel& q);

/// sum_x ½(log P(x) - log Q(x))^2 without enumerating X. Throws LogOfZero.
double f1_direct(const DecomposableModel& p, const DecomposableModel& q);
template <typename T>
Tracked<T> f1_tracked(const DecomposableModel& p, const DecomposableModel& q);

}  // namespace abdiv

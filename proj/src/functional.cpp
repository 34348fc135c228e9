#include "abdiv/functional.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "abdiv/error.hpp"

namespace abdiv {

namespace {

void require_same_variables(const DecomposableModel& p, const DecomposableModel& q) {
  if (p.vars() != q.vars()) {
    throw Error(ErrorKind::kVariableMismatch, "models are defined over different variables");
  }
}

std::vector<int> map_cliques(const CliqueSet& model_cliques, const CliqueSet& host_cliques) {
  std::map<int, std::vector<int>> holders;
  for (int k = 0; k < static_cast<int>(host_cliques.size()); ++k) {
    for (int v : host_cliques[k]) holders[v].push_back(k);
  }
  std::vector<int> out;
  out.reserve(model_cliques.size());
  for (const auto& c : model_cliques) {
    // Holder lists are ascending, so the first match is the smallest clique.
    const auto& candidates = holders.at(c.front());
    auto it = std::find_if(candidates.begin(), candidates.end(),
                           [&](int k) { return is_sorted_subset(c, host_cliques[k]); });
    if (it == candidates.end()) {
      throw Error(ErrorKind::kInvalidArgument, "model clique not covered by the computation graph");
    }
    out.push_back(*it);
  }
  return out;
}

const InnerTransform& transform_for(const std::vector<InnerTransform>& transforms, std::size_t i) {
  return transforms.size() == 1 ? transforms.front() : transforms[i];
}

void validate_transforms(const std::vector<InnerTransform>& transforms, int num_cliques,
                         const char* side) {
  if (transforms.size() != 1 && static_cast<int>(transforms.size()) != num_cliques) {
    throw Error(ErrorKind::kInvalidArgument,
                std::string(side) + " transform list must have one entry or one per clique");
  }
  for (const auto& t : transforms) {
    if (const auto* c = std::get_if<ConstantTransform>(&t)) {
      if (!(c->base > 0.0) || !std::isfinite(c->base) || !std::isfinite(c->exponent)) {
        throw Error(ErrorKind::kInvalidArgument, "constant transform needs a finite base > 0");
      }
    } else if (!std::isfinite(std::get<PowerTransform>(t).exponent)) {
      throw Error(ErrorKind::kInvalidArgument, "power transform exponent must be finite");
    }
  }
}

template <typename T>
T log_scale(const OuterLog& outer) {
  if (const auto* lb = std::get_if<LogBase>(&outer)) return T(1) / scalar_log(T(lb->base));
  return T(1);
}

// Clique factors P_C / P_S computed in T.
template <typename T>
std::vector<BasicFactor<T>> jt_factors(const DecomposableModel& m) {
  std::vector<BasicFactor<T>> out;
  out.reserve(m.clique_marginals().size());
  for (int c = 0; c < m.num_cliques(); ++c) {
    BasicFactor<T> marginal = m.clique_marginals()[c].template cast<T>();
    if (m.forest().parent_of(c) < 0) {
      out.push_back(std::move(marginal));
      continue;
    }
    try {
      out.push_back(divide(marginal, m.separator_marginals()[c].template cast<T>()));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kDivisionByZero) throw;
      throw Error(ErrorKind::kInconsistentModel,
                  "clique " + std::to_string(c) + " has mass where its separator has none");
    }
  }
  return out;
}

// sum_C R_tau(C) sum_x L(g*[D^jt_C]) beta_alpha(C) for one model, with the sum
// of absolute terms.
template <typename T>
Tracked<T> model_side(const DecomposableModel& model, const std::vector<BasicFactor<T>>& jt,
                      const std::vector<InnerTransform>& transforms, const std::vector<int>& alpha,
                      const std::vector<int>& tau, const BasicCalibration<T>& cal,
                      const std::vector<T>& other_trees, T scale) {
  Tracked<T> total;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    const BasicFactor<T> weight = marginalize(cal.beliefs[alpha[i]], model.cliques()[i]);
    const auto& transform = transform_for(transforms, i);
    Tracked<T> inner;
    if (const auto* c = std::get_if<ConstantTransform>(&transform)) {
      inner.value = T(c->exponent) * scalar_log(T(c->base)) * weight.sum();
      inner.magnitude = scalar_abs(inner.value);
    } else {
      const T exponent = std::get<PowerTransform>(transform).exponent;
      const BasicFactor<T>& f = jt[i];
      for (std::size_t j = 0; j < weight.size(); ++j) {
        const T w = weight[j];
        if (w == T(0) || exponent == T(0)) continue;
        if (f[j] == T(0)) {
          throw Error(ErrorKind::kLogOfZeroOnSupport,
                      "log of a zero clique factor where the weighting belief is positive");
        }
        const T term = w * exponent * scalar_log(f[j]);
        inner.value += term;
        inner.magnitude += scalar_abs(term);
      }
    }
    const T factor = other_trees[tau[i]] * scale;
    total.value += factor * inner.value;
    total.magnitude += scalar_abs(factor) * inner.magnitude;
  }
  return total;
}

template <typename T>
struct Evaluation {
  Tracked<T> f;
  BasicCalibration<T> calibration;
};

template <typename T>
Evaluation<T> evaluate(const ComputationGraph& cg, const FunctionalSpec& spec,
                       const DecomposableModel& p, const DecomposableModel& q) {
  validate(spec, p, q);
  require_same_variables(p, q);
  const auto jt_p = jt_factors<T>(p);
  const auto jt_q = jt_factors<T>(q);
  std::vector<BasicAssignedFactor<T>> factors;
  factors.reserve(jt_p.size() + jt_q.size());
  for (std::size_t i = 0; i < jt_p.size(); ++i) {
    factors.push_back({elementwise_power(jt_p[i], spec.g_exp), cg.alpha_p[i]});
  }
  for (std::size_t i = 0; i < jt_q.size(); ++i) {
    factors.push_back({elementwise_power(jt_q[i], spec.h_exp), cg.alpha_q[i]});
  }
  const auto cards = p.vars().cardinalities();
  Evaluation<T> out;
  out.calibration = calibrate(cg.forest, cards, factors);

  const auto& totals = out.calibration.tree_totals;
  std::vector<T> other_trees(totals.size(), T(1));
  for (std::size_t t = 0; t < totals.size(); ++t) {
    for (std::size_t j = 0; j < totals.size(); ++j) {
      if (j != t) other_trees[t] *= totals[j];
    }
  }
  const T scale = log_scale<T>(spec.outer);
  const auto side_p =
      model_side(p, jt_p, spec.g_star, cg.alpha_p, cg.tau_p, out.calibration, other_trees, scale);
  const auto side_q =
      model_side(q, jt_q, spec.h_star, cg.alpha_q, cg.tau_q, out.calibration, other_trees, scale);
  out.f.value = side_p.value + side_q.value;
  out.f.magnitude = side_p.magnitude + side_q.magnitude;
  return out;
}

Calibration to_double(const BasicCalibration<Quad>& cal) {
  Calibration out;
  for (const auto& b : cal.beliefs) out.beliefs.push_back(b.template cast<double>());
  for (Quad t : cal.tree_totals) out.tree_totals.push_back(static_cast<double>(t));
  return out;
}

template <typename T>
struct Paths {
  T telescoping = 0;
  T belief_product = 1;
};

template <typename T>
Paths<T> paths_of(const ComputationGraph& cg, const DecomposableModel& p,
                  const DecomposableModel& q, double a, double b) {
  const Evaluation<T> r = evaluate<T>(cg, f2_spec(p, q, a, b), p, q);
  Paths<T> out;
  out.telescoping = r.f.value;
  for (const T& t : r.calibration.tree_totals) out.belief_product *= t;
  return out;
}

}  // namespace

ComputationGraph build_computation_graph(const DecomposableModel& p, const DecomposableModel& q) {
  require_same_variables(p, q);
  const auto q_edges = q.graph().edges();
  ComputationGraph cg;
  cg.graph = triangulate(p.graph().with_edges(q_edges));
  cg.forest = build_forest(cg.graph);
  cg.alpha_p = map_cliques(p.cliques(), cg.cliques());
  cg.alpha_q = map_cliques(q.cliques(), cg.cliques());
  for (int k : cg.alpha_p) cg.tau_p.push_back(cg.forest.tree_of(k));
  for (int k : cg.alpha_q) cg.tau_q.push_back(cg.forest.tree_of(k));
  return cg;
}

void validate(const FunctionalSpec& spec, const DecomposableModel& p, const DecomposableModel& q) {
  if (!std::isfinite(spec.g_exp) || !std::isfinite(spec.h_exp)) {
    throw Error(ErrorKind::kInvalidArgument, "g/h exponents must be finite");
  }
  validate_transforms(spec.g_star, p.num_cliques(), "g*");
  validate_transforms(spec.h_star, q.num_cliques(), "h*");
  if (const auto* lb = std::get_if<LogBase>(&spec.outer)) {
    if (!(lb->base > 0.0) || lb->base == 1.0 || !std::isfinite(lb->base)) {
      throw Error(ErrorKind::kInvalidArgument, "log base must be > 0 and != 1");
    }
  }
}

Calibration compute_sp_beliefs(const ComputationGraph& cg, const FunctionalSpec& spec,
                               const DecomposableModel& p, const DecomposableModel& q) {
  return to_double(evaluate<Quad>(cg, spec, p, q).calibration);
}

FunctionalResult evaluate_F_detailed(const ComputationGraph& cg, const FunctionalSpec& spec,
                                     const DecomposableModel& p, const DecomposableModel& q) {
  const Evaluation<Quad> r = evaluate<Quad>(cg, spec, p, q);
  return {static_cast<double>(r.f.value), to_double(r.calibration)};
}

template <typename T>
Tracked<T> evaluate_tracked(const ComputationGraph& cg, const FunctionalSpec& spec,
                            const DecomposableModel& p, const DecomposableModel& q) {
  return evaluate<T>(cg, spec, p, q).f;
}

double evaluate_F(const ComputationGraph& cg, const FunctionalSpec& spec,
                  const DecomposableModel& p, const DecomposableModel& q) {
  return static_cast<double>(evaluate_tracked<Quad>(cg, spec, p, q).value);
}

double rounding_factor(const ComputationGraph& cg, std::span<const int> cardinalities) {
  const auto& cliques = cg.cliques();
  const double k = static_cast<double>(cliques.size());
  double max_cells = 1.0;
  double total_cells = 0.0;
  for (const auto& c : cliques) {
    double cells = 1.0;
    for (int v : c) cells *= cardinalities[v];
    max_cells = std::max(max_cells, cells);
    total_cells += cells;
  }
  return k * (max_cells + k + 4.0) + 2.0 * total_cells + 16.0;
}

FunctionalSpec f2_spec(const DecomposableModel& p, const DecomposableModel& q, double a, double b) {
  FunctionalSpec spec;
  spec.g_exp = a;
  spec.h_exp = b;
  spec.g_star = {ConstantTransform{1.0 / (2.0 * p.num_cliques()), std::exp(1.0)}};
  spec.h_star = {ConstantTransform{1.0 / (2.0 * q.num_cliques()), std::exp(1.0)}};
  spec.outer = NaturalLog{};
  return spec;
}

FunctionalSpec f3_spec(double a, double b, double c, double d) {
  FunctionalSpec spec;
  spec.g_exp = a;
  spec.h_exp = b;
  spec.g_star = {PowerTransform{c}};
  spec.h_star = {PowerTransform{d}};
  spec.outer = NaturalLog{};
  return spec;
}

F2Paths f2_paths(const DecomposableModel& p, const DecomposableModel& q, double a, double b) {
  const auto paths = paths_of<Quad>(build_computation_graph(p, q), p, q, a, b);
  return {static_cast<double>(paths.telescoping), static_cast<double>(paths.belief_product)};
}

template <typename T>
Tracked<T> f2_tracked(const ComputationGraph& cg, const DecomposableModel& p,
                      const DecomposableModel& q, double a, double b) {
  const auto paths = paths_of<T>(cg, p, q, a, b);
  const T gap = scalar_abs(paths.telescoping - paths.belief_product);
  const T scale = std::max(scalar_abs(paths.telescoping), scalar_abs(paths.belief_product));
  if (gap > T(1e-9) * scale) {
    throw Error(ErrorKind::kInvalidArgument,
                "f2 routes disagree: " + std::to_string(static_cast<double>(paths.telescoping)) +
                    " vs " + std::to_string(static_cast<double>(paths.belief_product)));
  }
  // Every belief is nonnegative, so the product is its own magnitude.
  return {paths.belief_product, paths.belief_product};
}

double f2(const DecomposableModel& p, const DecomposableModel& q, double a, double b) {
  return static_cast<double>(f2_tracked<Quad>(build_computation_graph(p, q), p, q, a, b).value);
}

template <typename T>
Tracked<T> f3_tracked(const ComputationGraph& cg, const DecomposableModel& p,
                      const DecomposableModel& q, double a, double b, double c, double d) {
  return evaluate_tracked<T>(cg, f3_spec(a, b, c, d), p, q);
}

double f3(const DecomposableModel& p, const DecomposableModel& q, double a, double b, double c,
          double d) {
  return static_cast<double>(f3_tracked<Quad>(build_computation_graph(p, q), p, q, a, b, c, d).value);
}

namespace {

template <typename T>
struct LogTerm {
  BasicFactor<T> log_table;
  int sign = 1;
};

template <typename T>
std::vector<LogTerm<T>> log_terms(const DecomposableModel& m, const char* name) {
  std::vector<LogTerm<T>> out;
  auto add = [&](const Factor& f, int sign) {
    if ((f.values() == 0.0).any()) {
      throw Error(ErrorKind::kLogOfZero, std::string("model ") + name + " has a zero marginal cell");
    }
    out.push_back({elementwise_log(f.template cast<T>()), sign});
  };
  for (const auto& f : m.clique_marginals()) add(f, 1);
  for (int c : m.separator_owners()) add(m.separator_marginals()[c], -1);
  return out;
}

// sum over X of the product of two log tables, each depending only on its
// own scope.
template <typename T>
Tracked<T> pair_sum(const LogTerm<T>& b, const LogTerm<T>& d, const VariableTable& vars) {
  const auto joint = sorted_union(b.log_table.scope(), d.log_table.scope());
  T outside = 1;
  for (int v = 0; v < static_cast<int>(vars.size()); ++v) {
    if (!std::binary_search(joint.begin(), joint.end(), v)) outside *= T(vars.cardinality(v));
  }
  Tracked<T> out;
  if (b.log_table.scope() == d.log_table.scope()) {
    for (std::size_t i = 0; i < b.log_table.size(); ++i) {
      const T term = b.log_table[i] * d.log_table[i];
      out.value += term;
      out.magnitude += scalar_abs(term);
    }
  } else {
    const auto shared = sorted_intersection(b.log_table.scope(), d.log_table.scope());
    const auto mb = marginalize(b.log_table, shared);
    const auto md = marginalize(d.log_table, shared);
    const auto ab = marginalize(elementwise_abs(b.log_table), shared);
    const auto ad = marginalize(elementwise_abs(d.log_table), shared);
    out.value = dot(mb, md);
    out.magnitude = dot(ab, ad);
  }
  const T factor = T(b.sign * d.sign) * outside;
  return {factor * out.value, outside * out.magnitude};
}

template <typename T>
Tracked<T> cross_sum(const std::vector<LogTerm<T>>& left, const std::vector<LogTerm<T>>& right,
                     const VariableTable& vars) {
  Tracked<T> total;
  for (const auto& b : left) {
    for (const auto& d : right) {
      const auto t = pair_sum(b, d, vars);
      total.value += t.value;
      total.magnitude += t.magnitude;
    }
  }
  return total;
}

template <typename T>
std::array<Tracked<T>, 3> log_quadratic(const DecomposableModel& p, const DecomposableModel& q) {
  require_same_variables(p, q);
  const auto lp = log_terms<T>(p, "P");
  const auto lq = log_terms<T>(q, "Q");
  return {cross_sum(lp, lp, p.vars()), cross_sum(lq, lq, p.vars()), cross_sum(lp, lq, p.vars())};
}

}  // namespace

LogQuadraticTerms log_quadratic_terms(const DecomposableModel& p, const DecomposableModel& q) {
  const auto t = log_quadratic<Quad>(p, q);
  return {static_cast<double>(t[0].value), static_cast<double>(t[1].value),
          static_cast<double>(t[2].value)};
}

template <typename T>
Tracked<T> f1_tracked(const DecomposableModel& p, const DecomposableModel& q) {
  const auto t = log_quadratic<T>(p, q);
  return {(t[0].value + t[1].value - T(2) * t[2].value) / T(2),
          (t[0].magnitude + t[1].magnitude + T(2) * t[2].magnitude) / T(2)};
}

double f1_direct(const DecomposableModel& p, const DecomposableModel& q) {
  return static_cast<double>(f1_tracked<Quad>(p, q).value);
}

#define ABDIV_INSTANTIATE_TRACKED(T)                                                          \
  template Tracked<T> evaluate_tracked(const ComputationGraph&, const FunctionalSpec&,        \
                                       const DecomposableModel&, const DecomposableModel&);   \
  template Tracked<T> f2_tracked(const ComputationGraph&, const DecomposableModel&,           \
                                 const DecomposableModel&, double, double);                   \
  template Tracked<T> f3_tracked(const ComputationGraph&, const DecomposableModel&,           \
                                 const DecomposableModel&, double, double, double, double);   \
  template Tracked<T> f1_tracked(const DecomposableModel&, const DecomposableModel&);

ABDIV_INSTANTIATE_TRACKED(Quad)
ABDIV_INSTANTIATE_TRACKED(Mp)

}  // namespace abdiv

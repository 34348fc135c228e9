#include <doctest.h>

#include <cmath>

#include "abdiv/baselines.hpp"
#include "abdiv/error.hpp"
#include "abdiv/functional.hpp"
#include "abdiv/random_models.hpp"
#include "oracle.hpp"

using namespace abdiv;

namespace {

Factor make(std::vector<int> scope, std::vector<int> cards, std::vector<double> values) {
  Eigen::ArrayXd v = Eigen::Map<const Eigen::ArrayXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return Factor(std::move(scope), std::move(cards), v);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an abdiv::Error");
  return ErrorKind::kInvalidArgument;
}

bool close(double got, double expected, double rel) {
  return std::abs(got - expected) <= rel * std::max(std::abs(expected), 1e-300);
}

// P^jt_C(x) read from raw tables: clique entry over the child-side
// separator sum.
double jt_value(const DecomposableModel& m, int c, const std::vector<int>& x) {
  const double num = oracle::lookup(m.clique_marginals()[c], x);
  if (m.forest().parent_of(c) < 0 || num == 0.0) return num;
  return num / oracle::partial_sum(m.clique_marginals()[c], m.forest().parent_separator(c), x);
}

double transform_log(const InnerTransform& t, double value) {
  if (const auto* c = std::get_if<ConstantTransform>(&t)) return c->exponent * std::log(c->base);
  const double e = std::get<PowerTransform>(t).exponent;
  return e == 0.0 ? 0.0 : e * std::log(value);
}

// F by enumeration of its definition with the clique-wise inner transforms.
double oracle_F(const DecomposableModel& p, const DecomposableModel& q, const FunctionalSpec& spec) {
  const double scale =
      std::holds_alternative<LogBase>(spec.outer) ? 1.0 / std::log(std::get<LogBase>(spec.outer).base) : 1.0;
  auto pick = [](const std::vector<InnerTransform>& ts, int i) -> const InnerTransform& {
    return ts.size() == 1 ? ts[0] : ts[static_cast<std::size_t>(i)];
  };
  double total = 0.0;
  for (const auto& x : oracle::all_assignments(p.vars().cardinalities())) {
    const double w = oracle::power(oracle::joint(p, x), spec.g_exp) * oracle::power(oracle::joint(q, x), spec.h_exp);
    if (w == 0.0) continue;
    double log_arg = 0.0;
    for (int c = 0; c < p.num_cliques(); ++c) log_arg += transform_log(pick(spec.g_star, c), jt_value(p, c, x));
    for (int c = 0; c < q.num_cliques(); ++c) log_arg += transform_log(pick(spec.h_star, c), jt_value(q, c, x));
    total += w * log_arg * scale;
  }
  return total;
}

ModelPair small_pair(SampleStream& rng, int max_n, bool disconnected, double max_states = 4096) {
  const int n = 2 + rng.below(max_n - 1);
  const auto vars = random_variables(n, max_states, rng);
  return random_pair(vars, 1 + rng.below(4), disconnected, rng);
}

// Model over the variables of `a` followed by those of `b`.
DecomposableModel concatenate(const DecomposableModel& a, const DecomposableModel& b) {
  std::vector<Variable> vars(a.vars().begin(), a.vars().end());
  for (const auto& v : b.vars()) vars.push_back({"B" + v.name, v.cardinality});
  std::vector<Factor> marginals = a.clique_marginals();
  for (const auto& f : b.clique_marginals()) {
    std::vector<int> scope;
    for (int v : f.scope()) scope.push_back(v + a.vars().size());
    marginals.emplace_back(scope, f.cardinalities(), f.values());
  }
  return DecomposableModel::from_marginals(VariableTable(std::move(vars)), std::move(marginals));
}

}  // namespace

TEST_CASE("computation graph construction") {
  SUBCASE("identical structures map cliques to themselves") {
    SampleStream rng(1);
    const auto vars = make_variables(6, 2);
    const auto g = random_chordal_graph(6, 3, 0.0, rng);
    const auto p = random_model(vars, g, rng);
    const auto q = random_model(vars, g, rng);
    const auto cg = build_computation_graph(p, q);
    CHECK(cg.graph == g);
    for (int i = 0; i < p.num_cliques(); ++i) {
      CHECK(cg.alpha_p[i] == i);
      CHECK(cg.alpha_q[i] == i);
    }
  }
  SUBCASE("A-B and B-C") {
    const auto vars = make_variables(3, 2);
    const auto p = DecomposableModel::from_marginals(
        vars, {Factor::constant({0, 1}, {2, 2}, 0.25), Factor::constant({2}, {2}, 0.5)});
    const auto q = DecomposableModel::from_marginals(
        vars, {Factor::constant({1, 2}, {2, 2}, 0.25), Factor::constant({0}, {2}, 0.5)});
    const auto cg = build_computation_graph(p, q);
    CHECK(cg.graph.has_edge(0, 1));
    CHECK(cg.graph.has_edge(1, 2));
    CHECK(cg.cliques()[cg.alpha_p[0]] == Clique{0, 1});
    CHECK(cg.cliques()[cg.alpha_q[0]] == Clique{0, 1});  // {0} lies in {0,1} first
    CHECK(cg.cliques()[cg.alpha_q[1]] == Clique{1, 2});
  }
  SUBCASE("edgeless models give a forest of singletons") {
    const auto vars = make_variables(2, 2);
    const auto p = DecomposableModel::from_marginals(
        vars, {Factor::constant({0}, {2}, 0.5), Factor::constant({1}, {2}, 0.5)});
    const auto cg = build_computation_graph(p, p);
    CHECK(cg.graph.num_edges() == 0);
    CHECK(cg.forest.num_trees() == 2);
    CHECK(cg.tau_p == std::vector<int>{0, 1});
  }
  SUBCASE("containment and tree mapping on random pairs") {
    SampleStream rng(2);
    for (int t = 0; t < 100; ++t) {
      const auto pr = small_pair(rng, 14, t % 2 == 0, 1e6);
      const auto cg = build_computation_graph(pr.p, pr.q);
      CHECK(is_chordal(cg.graph).chordal);
      for (const auto& [u, v] : pr.p.graph().edges()) CHECK(cg.graph.has_edge(u, v));
      for (const auto& [u, v] : pr.q.graph().edges()) CHECK(cg.graph.has_edge(u, v));
      for (int i = 0; i < pr.p.num_cliques(); ++i) {
        const auto& c = pr.p.cliques()[i];
        CHECK(is_sorted_subset(c, cg.cliques()[cg.alpha_p[i]]));
        CHECK(cg.tau_p[i] == cg.forest.tree_of(cg.alpha_p[i]));
        // Smallest containing clique.
        for (int k = 0; k < cg.alpha_p[i]; ++k) CHECK_FALSE(is_sorted_subset(c, cg.cliques()[k]));
      }
    }
  }
  SUBCASE("variable tables must match") {
    SampleStream rng(3);
    const auto p = random_model(make_variables(3, 2), chain_graph(3), rng);
    const auto q = random_model(make_variables(3, 3), chain_graph(3), rng);
    CHECK(kind_of([&] { build_computation_graph(p, q); }) == ErrorKind::kVariableMismatch);
  }
}

TEST_CASE("sum-product beliefs") {
  SampleStream rng(4);
  for (int t = 0; t < 40; ++t) {
    const auto pr = small_pair(rng, 10, t % 2 == 1, 1024);
    const auto cg = build_computation_graph(pr.p, pr.q);
    FunctionalSpec spec;
    spec.g_exp = 1.0;
    spec.h_exp = 1.0;
    const auto cal = compute_sp_beliefs(build_computation_graph(pr.p, pr.p), spec, pr.p, pr.p);
    double product = 1.0;
    for (double r : cal.tree_totals) product *= r;
    const double expected = oracle::sum_over_states(pr.p, pr.p, [](double x, double) { return x * x; });
    CHECK(close(product, expected, 1e-9));

    spec.g_exp = 0.0;
    spec.h_exp = 0.0;
    const auto ones = compute_sp_beliefs(cg, spec, pr.p, pr.q);
    for (int c = 0; c < cg.forest.num_cliques(); ++c) {
      // Tree domain size over clique domain size in every cell.
      const int tree = cg.forest.tree_of(c);
      double tree_states = 1.0;
      std::vector<int> seen;
      for (int k : cg.forest.trees()[tree].cliques) {
        for (int v : cg.cliques()[k]) seen.push_back(v);
      }
      std::sort(seen.begin(), seen.end());
      seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
      for (int v : seen) tree_states *= pr.p.vars().cardinality(v);
      const double expected_cell = tree_states / static_cast<double>(ones.beliefs[c].size());
      CHECK((ones.beliefs[c].values() == expected_cell).all());
    }
  }
}

TEST_CASE("evaluate_F equals its enumerated definition") {
  SampleStream rng(5);
  const double exps[] = {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  for (int t = 0; t < 60; ++t) {
    const auto pr = small_pair(rng, 9, t % 3 == 0, 2048);
    const auto cg = build_computation_graph(pr.p, pr.q);
    for (int k = 0; k < 6; ++k) {
      FunctionalSpec spec;
      spec.g_exp = exps[rng.below(6)];
      spec.h_exp = exps[rng.below(6)];
      spec.g_star.clear();
      for (int c = 0; c < pr.p.num_cliques(); ++c) {
        if (rng.uniform() < 0.5) {
          spec.g_star.push_back(PowerTransform{exps[rng.below(6)]});
        } else {
          spec.g_star.push_back(ConstantTransform{exps[rng.below(6)], 0.5 + 3.0 * rng.uniform()});
        }
      }
      spec.h_star = {PowerTransform{exps[rng.below(6)]}};
      if (k % 2) spec.outer = LogBase{2.0 + rng.uniform()};
      const double got = evaluate_F(cg, spec, pr.p, pr.q);
      const double expected = oracle_F(pr.p, pr.q, spec);
      const bool ok = std::abs(got - expected) <= 1e-9 * std::max(std::abs(expected), 1.0);
      CHECK(ok);
    }
  }
}

TEST_CASE("f2") {
  SampleStream rng(6);
  const auto vars = make_variables(4, 2);
  const auto pr = random_pair(vars, 3, false, rng);
  CHECK(f2(pr.p, pr.p, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f2(pr.p, pr.q, 0.0, 0.0) == doctest::Approx(16.0).epsilon(1e-12));

  const double grid[] = {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0};
  for (int t = 0; t < 80; ++t) {
    const auto r = small_pair(rng, 12, t % 2 == 0);
    const auto pj = oracle::joint_table(r.p);
    const auto qj = oracle::joint_table(r.q);
    for (double a : grid) {
      for (double b : grid) {
        const double expected =
            oracle::sum_pairs(pj, qj, [a, b](double x, double y) { return oracle::power(x, a) * oracle::power(y, b); });
        const auto paths = f2_paths(r.p, r.q, a, b);
        CHECK(close(paths.telescoping, expected, 1e-9));
        CHECK(close(paths.belief_product, expected, 1e-9));
        CHECK(close(paths.telescoping, paths.belief_product, 1e-9));
        CHECK(close(f2(r.q, r.p, b, a), f2(r.p, r.q, a, b), 1e-12));
      }
    }
  }
}

TEST_CASE("f2 with zero cells") {
  SampleStream rng(7);
  const auto vars = make_variables(5, 2);
  const auto pr = random_pair(vars, 3, false, rng, 0.3);
  const double expected = oracle::sum_over_states(pr.p, pr.q, [](double x, double y) { return std::sqrt(x * y); });
  CHECK(close(f2(pr.p, pr.q, 0.5, 0.5), expected, 1e-9));
  bool has_zero = false;
  for (const auto& f : pr.p.clique_marginals()) has_zero = has_zero || (f.values() == 0.0).any();
  REQUIRE(has_zero);
  CHECK(kind_of([&] { f2(pr.p, pr.q, -1.0, 0.0); }) == ErrorKind::kNegativePowerOfZero);
}

TEST_CASE("f3") {
  SampleStream rng(8);
  for (int t = 0; t < 40; ++t) {
    const auto pr = small_pair(rng, 10, t % 2 == 0);
    const auto& p = pr.p;
    const auto& q = pr.q;
    CHECK(f3(p, q, 0.7, -0.3, 0.0, 0.0) == 0.0);
    const double neg_entropy = oracle::sum_over_states(p, p, [](double x, double) { return x * std::log(x); });
    CHECK(close(f3(p, p, 1.0, 0.0, 1.0, 0.0), neg_entropy, 1e-9));
    const double kl = oracle::sum_over_states(p, q, [](double x, double y) { return x * std::log(x / y); });
    CHECK(close(f3(p, q, 1.0, 0.0, 1.0, -1.0), kl, 1e-9));
  }
}

TEST_CASE("f3 with zeros off and on the support") {
  const auto vars = make_variables(1, 2);
  const auto p = DecomposableModel::from_marginals(vars, {make({0}, {2}, {0.0, 1.0})});
  const auto q = DecomposableModel::from_marginals(vars, {make({0}, {2}, {0.5, 0.5})});
  // The zero cell of P carries zero weight: 0 * log 0 = 0.
  CHECK(f3(p, q, 1.0, 0.0, 1.0, 0.0) == 0.0);
  CHECK(f3(p, q, 1.0, 0.0, 0.0, 1.0) == doctest::Approx(std::log(0.5)));
  // Weighted by Q, the zero of P lands on the support.
  CHECK(kind_of([&] { f3(p, q, 0.0, 1.0, 1.0, 0.0); }) == ErrorKind::kLogOfZeroOnSupport);
}

TEST_CASE("disconnected computation graphs factor over blocks") {
  SampleStream rng(9);
  for (int t = 0; t < 20; ++t) {
    const auto a = small_pair(rng, 6, false, 64);
    const auto b = small_pair(rng, 6, false, 64);
    const auto p = concatenate(a.p, b.p);
    const auto q = concatenate(a.q, b.q);
    const auto cg = build_computation_graph(p, q);
    CHECK(cg.forest.num_trees() >= 2);
    const double x = 0.5;
    const double y = -0.5;
    CHECK(close(f2(p, q, x, y), f2(a.p, a.q, x, y) * f2(b.p, b.q, x, y), 1e-12));
    const double combined = f3(a.p, a.q, x, y, 1.0, -1.0) * f2(b.p, b.q, x, y) +
                            f2(a.p, a.q, x, y) * f3(b.p, b.q, x, y, 1.0, -1.0);
    CHECK(close(f3(p, q, x, y, 1.0, -1.0), combined, 1e-9));
  }
}

TEST_CASE("f1_direct") {
  SUBCASE("identical models") {
    SampleStream rng(10);
    const auto pr = random_pair(make_variables(6, 2), 3, false, rng);
    CHECK(std::abs(f1_direct(pr.p, pr.p)) <= 1e-10);
  }
  SUBCASE("single variable by hand") {
    const auto vars = make_variables(1, 2);
    const auto p = DecomposableModel::from_marginals(vars, {make({0}, {2}, {0.5, 0.5})});
    const auto q = DecomposableModel::from_marginals(vars, {make({0}, {2}, {0.25, 0.75})});
    const double l2 = std::log(2.0);
    const double expected = 0.5 * (std::pow(l2 - std::log(4.0), 2) + std::pow(l2 - std::log(4.0 / 3.0), 2));
    CHECK(f1_direct(p, q) == doctest::Approx(expected).epsilon(1e-14));
  }
  SUBCASE("random ten-variable chains") {
    SampleStream rng(11);
    const auto vars = make_variables(10, 2);
    for (int t = 0; t < 10; ++t) {
      const auto p = random_model(vars, chain_graph(10), rng);
      const auto q = random_model(vars, chain_graph(10), rng);
      const double expected = oracle::sum_over_states(p, q, [](double x, double y) {
        const double d = std::log(x) - std::log(y);
        return 0.5 * d * d;
      });
      CHECK(close(f1_direct(p, q), expected, 1e-8));
    }
  }
  SUBCASE("each quadratic piece matches enumeration") {
    SampleStream rng(12);
    for (int t = 0; t < 40; ++t) {
      const auto pr = small_pair(rng, 11, t % 2 == 0);
      const auto terms = log_quadratic_terms(pr.p, pr.q);
      const auto sq = [](double x, double) { return std::log(x) * std::log(x); };
      CHECK(close(terms.pp, oracle::sum_over_states(pr.p, pr.q, sq), 1e-9));
      CHECK(close(terms.qq, oracle::sum_over_states(pr.q, pr.p, sq), 1e-9));
      CHECK(close(terms.pq, oracle::sum_over_states(pr.p, pr.q, [](double x, double y) {
                    return std::log(x) * std::log(y);
                  }),
                  1e-9));
    }
  }
  SUBCASE("zero cells are rejected") {
    const auto vars = make_variables(1, 2);
    const auto p = DecomposableModel::from_marginals(vars, {make({0}, {2}, {0.0, 1.0})});
    CHECK(kind_of([&] { f1_direct(p, p); }) == ErrorKind::kLogOfZero);
  }
}

TEST_CASE("spec validation") {
  SampleStream rng(13);
  const auto pr = random_pair(make_variables(3, 2), 2, false, rng);
  FunctionalSpec spec;
  spec.outer = LogBase{1.0};
  CHECK(kind_of([&] { validate(spec, pr.p, pr.q); }) == ErrorKind::kInvalidArgument);
  spec.outer = NaturalLog{};
  spec.g_star = {ConstantTransform{1.0, -2.0}};
  CHECK(kind_of([&] { validate(spec, pr.p, pr.q); }) == ErrorKind::kInvalidArgument);
  spec.g_star = std::vector<InnerTransform>(static_cast<std::size_t>(pr.p.num_cliques() + 1), PowerTransform{1.0});
  CHECK(kind_of([&] { validate(spec, pr.p, pr.q); }) == ErrorKind::kInvalidArgument);
}

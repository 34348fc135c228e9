#include "abdiv/baselines.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "abdiv/error.hpp"

namespace abdiv {

namespace {

template <typename Visit>
void for_each_assignment(const VariableTable& vars, Visit&& visit) {
  const int n = vars.size();
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  while (true) {
    visit(std::span<const int>(x));
    int d = n - 1;
    while (d >= 0 && ++x[d] == vars.cardinality(d)) x[d--] = 0;
    if (d < 0) return;
  }
}

// x^e with 0^0 = 1; zero raised to a negative power raises `kind`.
double power_or_throw(double x, double e, ErrorKind kind) {
  if (e == 0.0) return 1.0;
  if (x == 0.0) {
    if (e < 0.0) throw Error(kind, "zero probability raised to a negative power");
    return 0.0;
  }
  return std::pow(x, e);
}

double log_or_throw(double x, ErrorKind kind) {
  if (x == 0.0) throw Error(kind, "log of a zero probability");
  return std::log(x);
}

// e^x - 1 - x without cancellation near zero.
double expm1_minus_identity(double x) {
  if (std::abs(x) >= 0.5) return std::expm1(x) - x;
  double term = x * x / 2.0;
  double sum = term;
  for (int k = 3; std::abs(term) > 1e-18 * std::abs(sum); ++k) {
    term *= x / k;
    sum += term;
  }
  return sum;
}

void require_same_variables(const DecomposableModel& p, const DecomposableModel& q) {
  if (p.vars() != q.vars()) {
    throw Error(ErrorKind::kVariableMismatch, "models are defined over different variables");
  }
}

// Splits a transform list into (constant log contribution, shared power).
struct ReducedTransform {
  double constant_log = 0.0;
  double power = 0.0;
};

ReducedTransform reduce(const std::vector<InnerTransform>& transforms, int num_cliques) {
  ReducedTransform r;
  bool seen_power = false;
  for (int i = 0; i < num_cliques; ++i) {
    const auto& t = transforms.size() == 1 ? transforms.front() : transforms[i];
    if (const auto* c = std::get_if<ConstantTransform>(&t)) {
      r.constant_log += c->exponent * std::log(c->base);
    } else {
      const double e = std::get<PowerTransform>(t).exponent;
      if (seen_power && e != r.power) {
        throw Error(ErrorKind::kInvalidArgument,
                    "enumeration oracle needs one shared power exponent per model");
      }
      seen_power = true;
      r.power = e;
    }
  }
  if (seen_power && r.constant_log != 0.0) {
    throw Error(ErrorKind::kInvalidArgument, "enumeration oracle cannot mix power and constant transforms");
  }
  return r;
}

}  // namespace

Eigen::ArrayXd joint_table(const DecomposableModel& m, double max_states) {
  const double states = m.vars().domain_size();
  if (!(states <= max_states)) {
    throw Error(ErrorKind::kDomainTooLarge,
                "joint domain of " + std::to_string(states) + " states exceeds the enumeration cap");
  }
  Eigen::ArrayXd out(static_cast<Eigen::Index>(std::llround(states)));
  Eigen::Index i = 0;
  for_each_assignment(m.vars(), [&](std::span<const int> x) { out[i++] = evaluate_joint(m, x); });
  return out;
}

double brute_force_functional(const DecomposableModel& p, const DecomposableModel& q,
                              const FunctionalSpec& spec, double max_states) {
  require_same_variables(p, q);
  validate(spec, p, q);
  const ReducedTransform gs = reduce(spec.g_star, p.num_cliques());
  const ReducedTransform hs = reduce(spec.h_star, q.num_cliques());
  const double scale =
      std::holds_alternative<LogBase>(spec.outer) ? 1.0 / std::log(std::get<LogBase>(spec.outer).base) : 1.0;
  const Eigen::ArrayXd pj = joint_table(p, max_states);
  const Eigen::ArrayXd qj = joint_table(q, max_states);

  double total = 0.0;
  for (Eigen::Index i = 0; i < pj.size(); ++i) {
    const double w = power_or_throw(pj[i], spec.g_exp, ErrorKind::kNegativePowerOfZero) *
                     power_or_throw(qj[i], spec.h_exp, ErrorKind::kNegativePowerOfZero);
    if (w == 0.0) continue;
    double log_arg = gs.constant_log + hs.constant_log;
    if (gs.power != 0.0) log_arg += gs.power * log_or_throw(pj[i], ErrorKind::kLogOfZeroOnSupport);
    if (hs.power != 0.0) log_arg += hs.power * log_or_throw(qj[i], ErrorKind::kLogOfZeroOnSupport);
    total += w * log_arg * scale;
  }
  return total;
}

double brute_force_f1(const DecomposableModel& p, const DecomposableModel& q, double max_states) {
  require_same_variables(p, q);
  return brute_force_divergence(joint_table(p, max_states), joint_table(q, max_states), {0.0, 0.0});
}

double brute_force_f2(const DecomposableModel& p, const DecomposableModel& q, double a, double b,
                      double max_states) {
  require_same_variables(p, q);
  const Eigen::ArrayXd pj = joint_table(p, max_states);
  const Eigen::ArrayXd qj = joint_table(q, max_states);
  double total = 0.0;
  for (Eigen::Index i = 0; i < pj.size(); ++i) {
    total += power_or_throw(pj[i], a, ErrorKind::kNegativePowerOfZero) *
             power_or_throw(qj[i], b, ErrorKind::kNegativePowerOfZero);
  }
  return total;
}

double brute_force_f3(const DecomposableModel& p, const DecomposableModel& q, double a, double b,
                      double c, double d, double max_states) {
  FunctionalSpec spec;
  spec.g_exp = a;
  spec.h_exp = b;
  spec.g_star = {PowerTransform{c}};
  spec.h_star = {PowerTransform{d}};
  return brute_force_functional(p, q, spec, max_states);
}

double brute_force_divergence(const Eigen::ArrayXd& pj, const Eigen::ArrayXd& qj, AlphaBeta ab) {
  if (pj.size() != qj.size()) throw Error(ErrorKind::kVariableMismatch, "joint tables differ in size");
  const double a = ab.alpha;
  const double b = ab.beta;
  constexpr auto kPow = ErrorKind::kNegativePowerOfZero;
  constexpr auto kLog = ErrorKind::kLogOfZeroOnSupport;
  const DivergenceCase which = classify(ab);
  // Cells where both probabilities are positive use the same expression
  // rewritten around L = log Q - log P, which is exactly zero when P = Q.
  double total = 0.0;
  for (Eigen::Index i = 0; i < pj.size(); ++i) {
    const double p = pj[i];
    const double q = qj[i];
    const bool positive = p > 0.0 && q > 0.0;
    const double l = positive ? std::log(q) - std::log(p) : 0.0;
    switch (which) {
      case DivergenceCase::kGeneral: {
        const double s = a + b;
        if (positive) {
          total += std::pow(p, s) * (expm1_minus_identity(b * l) - b / s * expm1_minus_identity(s * l));
        } else {
          total += power_or_throw(p, a, kPow) * power_or_throw(q, b, kPow) -
                   a / s * power_or_throw(p, s, kPow) - b / s * power_or_throw(q, s, kPow);
        }
        break;
      }
      case DivergenceCase::kBetaZero: {
        const double pa = power_or_throw(p, a, kPow);
        if (positive) {
          total += pa * expm1_minus_identity(a * l);
        } else {
          const double log_term = pa == 0.0 ? 0.0 : pa * a * (std::log(p) - log_or_throw(q, kLog));
          total += log_term - pa + power_or_throw(q, a, kPow);
        }
        break;
      }
      case DivergenceCase::kOpposite:
        log_or_throw(p, kLog);
        log_or_throw(q, kLog);
        total += expm1_minus_identity(-a * l);
        break;
      case DivergenceCase::kAlphaZero: {
        const double qb = power_or_throw(q, b, kPow);
        if (positive) {
          total += qb * expm1_minus_identity(-b * l);
        } else {
          const double log_term = qb == 0.0 ? 0.0 : qb * b * (std::log(q) - log_or_throw(p, kLog));
          total += log_term - qb + power_or_throw(p, b, kPow);
        }
        break;
      }
      case DivergenceCase::kBothZero: {
        log_or_throw(p, ErrorKind::kLogOfZero);
        log_or_throw(q, ErrorKind::kLogOfZero);
        total += 0.5 * l * l;
        break;
      }
    }
  }
  switch (which) {
    case DivergenceCase::kGeneral: return -total / (a * b);
    case DivergenceCase::kBetaZero:
    case DivergenceCase::kOpposite: return total / (a * a);
    case DivergenceCase::kAlphaZero: return total / (b * b);
    case DivergenceCase::kBothZero: return total;
  }
  return total;
}

double brute_force_divergence(const DecomposableModel& p, const DecomposableModel& q, AlphaBeta ab,
                              double max_states) {
  require_same_variables(p, q);
  return brute_force_divergence(joint_table(p, max_states), joint_table(q, max_states), ab);
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

SampleStream::SampleStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double SampleStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int SampleStream::below(int n) {
  const int v = static_cast<int>(uniform() * n);
  return v < n ? v : n - 1;
}

namespace {

constexpr std::size_t kChunkRows = 4096;

std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t stream, std::size_t chunk) {
  return splitmix64(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ULL)) + chunk);
}

// Per-clique layout for drawing the clique's free variables given its
// separator with the parent.
struct CliqueSampler {
  std::vector<int> free_vars;
  std::vector<std::size_t> free_strides;
  std::vector<int> free_cards;
  std::vector<int> sep_vars;
  std::vector<std::size_t> sep_strides;
  const Factor* table = nullptr;
};

std::vector<CliqueSampler> make_samplers(const DecomposableModel& m, std::vector<int>& order) {
  std::vector<CliqueSampler> samplers(static_cast<std::size_t>(m.num_cliques()));
  order.clear();
  for (const auto& tree : m.forest().trees()) {
    order.push_back(tree.root);
    for (const auto& e : tree.edges) order.push_back(e.child);
  }
  for (int c : order) {
    auto& s = samplers[c];
    const Factor& f = m.clique_marginals()[c];
    s.table = &f;
    const auto& sep = m.forest().parent_separator(c);
    for (std::size_t i = 0; i < f.scope().size(); ++i) {
      const int v = f.scope()[i];
      if (std::binary_search(sep.begin(), sep.end(), v)) {
        s.sep_vars.push_back(v);
        s.sep_strides.push_back(f.strides()[i]);
      } else {
        s.free_vars.push_back(v);
        s.free_strides.push_back(f.strides()[i]);
        s.free_cards.push_back(f.cardinalities()[i]);
      }
    }
  }
  return samplers;
}

template <typename Visit>
void for_each_free_cell(const CliqueSampler& s, std::size_t base, Visit&& visit) {
  const std::size_t k = s.free_vars.size();
  std::vector<int> counter(k, 0);
  std::size_t idx = base;
  while (true) {
    if (!visit(idx, counter)) return;
    std::size_t d = k;
    while (d-- > 0) {
      if (++counter[d] < s.free_cards[d]) {
        idx += s.free_strides[d];
        break;
      }
      idx -= static_cast<std::size_t>(s.free_cards[d] - 1) * s.free_strides[d];
      counter[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) return;
  }
}

void draw_clique(const CliqueSampler& s, SampleStream& stream, std::span<int> row) {
  std::size_t base = 0;
  for (std::size_t i = 0; i < s.sep_vars.size(); ++i) {
    base += static_cast<std::size_t>(row[s.sep_vars[i]]) * s.sep_strides[i];
  }
  double total = 0.0;
  for_each_free_cell(s, base, [&](std::size_t idx, const std::vector<int>&) {
    total += (*s.table)[idx];
    return true;
  });
  if (!(total > 0.0)) {
    throw Error(ErrorKind::kInconsistentModel, "sampled a separator state with zero mass");
  }
  const double target = stream.uniform() * total;
  double running = 0.0;
  std::vector<int> chosen;
  for_each_free_cell(s, base, [&](std::size_t idx, const std::vector<int>& counter) {
    const double v = (*s.table)[idx];
    if (v > 0.0) chosen = counter;
    running += v;
    return running <= target;
  });
  for (std::size_t i = 0; i < s.free_vars.size(); ++i) row[s.free_vars[i]] = chosen[i];
}

}  // namespace

SampleBatch forward_sample(const DecomposableModel& m, std::size_t count, std::uint64_t seed) {
  std::vector<int> order;
  const auto samplers = make_samplers(m, order);
  SampleBatch batch;
  batch.seed = seed;
  batch.rows.resize(static_cast<Eigen::Index>(count), m.vars().size());
  for (std::size_t start = 0; start < count; start += kChunkRows) {
    SampleStream stream(chunk_seed(seed, 1, start / kChunkRows));
    const std::size_t end = std::min(count, start + kChunkRows);
    for (std::size_t r = start; r < end; ++r) {
      std::span<int> row(batch.rows.row(static_cast<Eigen::Index>(r)).data(),
                         static_cast<std::size_t>(m.vars().size()));
      for (int c : order) draw_clique(samplers[c], stream, row);
    }
  }
  return batch;
}

// ---------------------------------------------------------------------------
// Monte Carlo divergence

namespace {

struct TermSamples {
  std::vector<double> values;
};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double variance_of_mean(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size());
}

double bootstrap_mean_sd(const std::vector<std::vector<double>>& parts, int replicates,
                         std::uint64_t seed) {
  std::vector<double> estimates;
  estimates.reserve(static_cast<std::size_t>(replicates));
  SampleStream stream(chunk_seed(seed, 3, 0));
  for (int r = 0; r < replicates; ++r) {
    double est = 0.0;
    for (const auto& part : parts) {
      if (part.empty()) continue;
      const int n = static_cast<int>(part.size());
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += part[static_cast<std::size_t>(stream.below(n))];
      est += s / n;
    }
    estimates.push_back(est);
  }
  return std::sqrt(variance_of_mean(estimates) * static_cast<double>(estimates.size()));
}

}  // namespace

McEstimate mc_alpha_beta(const DecomposableModel& p, const DecomposableModel& q, AlphaBeta ab,
                         std::size_t count, std::uint64_t seed, const McOptions& options) {
  require_same_variables(p, q);
  if (count == 0) throw Error(ErrorKind::kInvalidArgument, "need at least one sample");
  const double a = ab.alpha;
  const double b = ab.beta;
  const DivergenceCase which = classify(ab);
  const double domain = p.vars().domain_size();
  constexpr auto kZero = ErrorKind::kZeroProbabilitySample;

  // Per-sample contributions, already scaled by the case coefficients.
  // Terms carrying a power of P are averaged over x ~ P with weight
  // P^{a-1} Q^b; terms in Q alone over x ~ Q with weight Q^{b-1}.
  std::vector<double> from_p;
  std::vector<double> from_q;
  std::vector<double> uniform;
  double constant = 0.0;

  auto for_each_sample = [&](const DecomposableModel& source, std::uint64_t source_seed, auto&& visit) {
    const SampleBatch batch = forward_sample(source, count, source_seed);
    std::vector<int> row(static_cast<std::size_t>(p.vars().size()));
    for (Eigen::Index r = 0; r < batch.rows.rows(); ++r) {
      for (int v = 0; v < p.vars().size(); ++v) row[v] = batch.rows(r, v);
      visit(evaluate_joint(p, row), evaluate_joint(q, row));
    }
  };
  const std::uint64_t q_seed = chunk_seed(seed, 4, 0);

  switch (which) {
    case DivergenceCase::kGeneral: {
      const double s = a + b;
      for_each_sample(p, seed, [&](double px, double qx) {
        from_p.push_back(-(std::pow(px, a - 1.0) * power_or_throw(qx, b, kZero) - a / s * std::pow(px, s - 1.0)) /
                         (a * b));
      });
      for_each_sample(q, q_seed, [&](double, double qx) {
        from_q.push_back(b / s * std::pow(qx, s - 1.0) / (a * b));
      });
      break;
    }
    case DivergenceCase::kBetaZero:
      for_each_sample(p, seed, [&](double px, double qx) {
        const double w = std::pow(px, a - 1.0);
        from_p.push_back((w * a * (std::log(px) - log_or_throw(qx, kZero)) - w) / (a * a));
      });
      for_each_sample(q, q_seed, [&](double, double qx) { from_q.push_back(std::pow(qx, a - 1.0) / (a * a)); });
      break;
    case DivergenceCase::kAlphaZero:
      for_each_sample(q, q_seed, [&](double px, double qx) {
        const double w = std::pow(qx, b - 1.0);
        from_q.push_back((w * b * (std::log(qx) - log_or_throw(px, kZero)) - w) / (b * b));
      });
      for_each_sample(p, seed, [&](double px, double) { from_p.push_back(std::pow(px, b - 1.0) / (b * b)); });
      break;
    case DivergenceCase::kOpposite:
      for_each_sample(p, seed, [&](double px, double qx) {
        from_p.push_back(std::pow(px, a - 1.0) * power_or_throw(qx, -a, kZero) / (a * a));
      });
      break;
    case DivergenceCase::kBothZero:
      break;
  }

  const bool needs_uniform = which == DivergenceCase::kOpposite || which == DivergenceCase::kBothZero;
  if (needs_uniform) {
    uniform.reserve(count);
    std::vector<int> row(static_cast<std::size_t>(p.vars().size()));
    for (std::size_t start = 0; start < count; start += kChunkRows) {
      SampleStream stream(chunk_seed(seed, 2, start / kChunkRows));
      const std::size_t end = std::min(count, start + kChunkRows);
      for (std::size_t r = start; r < end; ++r) {
        for (int v = 0; v < p.vars().size(); ++v) row[v] = stream.below(p.vars().cardinality(v));
        const double lp = log_or_throw(evaluate_joint(p, row), kZero);
        const double lq = log_or_throw(evaluate_joint(q, row), kZero);
        if (which == DivergenceCase::kOpposite) {
          uniform.push_back(domain * a * (lq - lp) / (a * a));
        } else {
          uniform.push_back(domain * 0.5 * (lp - lq) * (lp - lq));
        }
      }
    }
    if (which == DivergenceCase::kOpposite) constant = -domain / (a * a);
  }

  McEstimate out;
  out.estimate = mean_of(from_p) + mean_of(from_q) + mean_of(uniform) + constant;
  if (options.bootstrap) {
    out.stderr_ = bootstrap_mean_sd({from_p, from_q, uniform}, options.bootstrap_replicates, seed);
  } else {
    out.stderr_ = std::sqrt(variance_of_mean(from_p) + variance_of_mean(from_q) + variance_of_mean(uniform));
  }
  return out;
}

}  // namespace abdiv

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

#include "abdiv/divergence.hpp"
#include "abdiv/functional.hpp"
#include "abdiv/model.hpp"

namespace abdiv {

/// Largest joint domain the enumeration oracle will walk.
inline constexpr double kDefaultBruteForceCap = 4194304.0;  // 2^22

/// P(x) for every x in X, row-major over variable ids (last id fastest),
/// computed with evaluate_joint. Throws DomainTooLarge.
Eigen::ArrayXd joint_table(const DecomposableModel& m, double max_states = kDefaultBruteForceCap);

/// Direct sum over X of the functional's defining expression.
double brute_force_functional(const DecomposableModel& p, const DecomposableModel& q,
                              const FunctionalSpec& spec, double max_states = kDefaultBruteForceCap);

double brute_force_f1(const DecomposableModel& p, const DecomposableModel& q,
                      double max_states = kDefaultBruteForceCap);
double brute_force_f2(const DecomposableModel& p, const DecomposableModel& q, double a, double b,
                      double max_states = kDefaultBruteForceCap);
double brute_force_f3(const DecomposableModel& p, const DecomposableModel& q, double a, double b,
                      double c, double d, double max_states = kDefaultBruteForceCap);

/// D_AB from its per-case definition applied cell by cell to enumerated
/// joints. Cells with P, Q > 0 are evaluated through L = log Q - log P and
/// e^x - 1 - x, so every cell term is free of cancellation.
double brute_force_divergence(const Eigen::ArrayXd& p_joint, const Eigen::ArrayXd& q_joint,
                              AlphaBeta ab);
double brute_force_divergence(const DecomposableModel& p, const DecomposableModel& q, AlphaBeta ab,
                              double max_states = kDefaultBruteForceCap);

/// Reproducible stream of doubles in [0, 1): mt19937_64 with 53-bit
/// mantissa extraction, seeded through SplitMix64. Identical on every
/// platform for a given seed.
class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed);
  double uniform();
  /// Uniform integer in [0, n).
  int below(int n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

struct SampleBatch {
  DataMatrix rows;
  std::uint64_t seed = 0;
  std::size_t count() const { return static_cast<std::size_t>(rows.rows()); }
};

/// Ancestral sampling through each clique tree: root clique from its
/// marginal, then every child from P_C / P_S given its separator.
SampleBatch forward_sample(const DecomposableModel& m, std::size_t count, std::uint64_t seed);

struct McOptions {
  /// Replace the delta-method standard error by a bootstrap estimate.
  bool bootstrap = false;
  int bootstrap_replicates = 200;
};

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// Monte Carlo D_AB from `count` draws per sampling distribution. Terms with
/// a power of P are sample means over x ~ P of P^{a-1} Q^b (times the log
/// factor for f3); terms in Q alone are sample means over x ~ Q of Q^{b-1}
/// (likewise). Unweighted sums over X (the a = -b log term and f1) use
/// uniform draws scaled by |X|. Throws ZeroProbabilitySample.
McEstimate mc_alpha_beta(const DecomposableModel& p, const DecomposableModel& q, AlphaBeta ab,
                         std::size_t count, std::uint64_t seed, const McOptions& options = {});

}  // namespace abdiv

#pragma once

#include <string>
#include <vector>

#include "abdiv/model.hpp"

namespace abdiv {

struct AlphaBeta {
  double alpha = 1.0;
  double beta = 0.0;

  bool operator==(const AlphaBeta&) const = default;
};

/// The five branches of the alpha-beta family. Selection compares against
/// zero exactly: (1e-12, 0) is kGeneral, not kBetaZero.
enum class DivergenceCase {
  kGeneral,    // alpha, beta, alpha + beta all nonzero
  kBetaZero,   // alpha != 0, beta == 0
  kOpposite,   // alpha == -beta != 0
  kAlphaZero,  // alpha == 0, beta != 0
  kBothZero,   // alpha == beta == 0
};

/// Throws InvalidArgument for non-finite parameters.
DivergenceCase classify(AlphaBeta ab);

/// D_AB(P || Q) assembled from f1 / f2 / f3:
///   general:   -1/(ab) [f2(a,b) - a/(a+b) f2(a+b,0) - b/(a+b) f2(0,a+b)]
///   beta = 0:  1/a^2 [f3(a,0,a,-a) - f2(a,0) + f2(0,a)]
///   a = -b:    1/a^2 [f3(0,0,-a,a) + f2(a,-a) - |X|]
///   alpha = 0: 1/b^2 [f3(0,b,-b,b) - f2(0,b) + f2(b,0)]
///   both 0:    f1(P, Q)
/// Support errors (LogOfZeroOnSupport, NegativePowerOfZero, LogOfZero) mean
/// the divergence is infinite or undefined for these supports.
double alpha_beta_divergence(const DecomposableModel& p, const DecomposableModel& q, AlphaBeta ab);

enum class NamedDivergence { kKl, kReverseKl, kSquaredLog };

AlphaBeta parameters_of(NamedDivergence name);
/// Accepts "kl", "reverse_kl", "squared_log". Throws InvalidArgument.
NamedDivergence parse_named_divergence(const std::string& name);
double named_divergence(const DecomposableModel& p, const DecomposableModel& q, NamedDivergence name);

/// {-1, -0.5, 0, 0.5, 1, 2}^2, alpha-major.
std::vector<AlphaBeta> default_grid();

}  // namespace abdiv

#pragma once

#include <Eigen/Core>
#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>
#include <cmath>
#include <limits>
#include <type_traits>

#if ABDIV_HAS_QUADMATH
#include <quadmath.h>
#endif

namespace abdiv {

/// Extended-precision scalar of the functional engine. Divergence terms are
/// assembled in it and rounded to double once.
#if ABDIV_HAS_QUADMATH
using Quad = __float128;
#else
using Quad = long double;
#endif

inline double scalar_log(double x) { return std::log(x); }
inline double scalar_pow(double x, double e) { return std::pow(x, e); }
inline double scalar_abs(double x) { return std::abs(x); }
inline long double scalar_log(long double x) { return std::log(x); }
inline long double scalar_pow(long double x, long double e) { return std::pow(x, e); }
inline long double scalar_abs(long double x) { return std::abs(x); }
#if ABDIV_HAS_QUADMATH
inline Quad scalar_log(Quad x) { return logq(x); }
inline Quad scalar_pow(Quad x, Quad e) { return powq(x, e); }
inline Quad scalar_abs(Quad x) { return fabsq(x); }
#endif

/// Arbitrary-precision scalar (MPFR). New values take the precision set by
/// ScopedMpPrecision.
using Mp = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                         boost::multiprecision::et_off>;

inline Mp scalar_log(const Mp& x) { return boost::multiprecision::log(x); }
inline Mp scalar_pow(const Mp& x, const Mp& e) { return boost::multiprecision::pow(x, e); }
inline Mp scalar_abs(const Mp& x) { return boost::multiprecision::abs(x); }

/// Sets the working precision of Mp in bits; restores the previous one on
/// destruction. Not thread-safe.
class ScopedMpPrecision {
 public:
  explicit ScopedMpPrecision(unsigned bits) : previous_(Mp::default_precision()) {
    Mp::default_precision(static_cast<unsigned>(std::ceil(bits * 0.30103)) + 1);
  }
  ~ScopedMpPrecision() { Mp::default_precision(previous_); }
  ScopedMpPrecision(const ScopedMpPrecision&) = delete;
  ScopedMpPrecision& operator=(const ScopedMpPrecision&) = delete;

 private:
  unsigned previous_;
};

/// log2 of the unit roundoff of each scalar type (Mp: at the current precision).
template <typename T>
double log2_epsilon() {
  if constexpr (std::is_same_v<T, Mp>) {
    return static_cast<double>(boost::multiprecision::log2(std::numeric_limits<Mp>::epsilon()));
  } else if constexpr (std::is_same_v<T, double>) {
    return -52.0;
  } else if constexpr (std::is_same_v<T, long double>) {
    return 1.0 - std::numeric_limits<long double>::digits;
  } else {
    return -112.0;
  }
}

/// False for NaN and +-inf.
template <typename T>
bool is_finite_value(T x) {
  return x - x == T(0);
}

template <typename T>
T negative_infinity() {
  return static_cast<T>(-std::numeric_limits<double>::infinity());
}

}  // namespace abdiv

#if ABDIV_HAS_QUADMATH
namespace Eigen {
template <>
struct NumTraits<__float128> : GenericNumTraits<__float128> {
  typedef __float128 Real;
  typedef __float128 NonInteger;
  typedef __float128 Literal;
  typedef __float128 Nested;
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 0,
    ReadCost = 2,
    AddCost = 8,
    MulCost = 8
  };
  static inline Real epsilon() { return FLT128_EPSILON; }
  static inline Real dummy_precision() { return 1e-30; }
  static inline Real highest() { return FLT128_MAX; }
  static inline Real lowest() { return -FLT128_MAX; }
  static inline int digits10() { return FLT128_DIG; }
};
}  // namespace Eigen
#endif

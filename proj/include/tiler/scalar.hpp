#pragma once

#include <cmath>
#include <concepts>
#include <type_traits>

#include <Eigen/Core>
#include <gmpxx.h>

namespace Eigen {

template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  using Real = mpq_class;
  using NonInteger = mpq_class;
  using Nested = mpq_class;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
};

}  // namespace Eigen

namespace tiler {

/// Exact scalar used by the rational oracle pipeline.
using Rational = mpq_class;

template <class S>
concept TilerScalar = std::same_as<S, double> || std::same_as<S, Rational>;

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
inline constexpr bool is_exact_v = std::is_same_v<S, Rational>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& q) { return q.get_d(); }

template <TilerScalar S>
S from_double(double x) {
  if constexpr (is_exact_v<S>) {
    return Rational(x);  // exact: every finite double is a dyadic rational
  } else {
    return x;
  }
}

inline double abs_value(double x) { return std::fabs(x); }
inline Rational abs_value(const Rational& q) { return Rational(abs(q)); }

inline double floor_value(double x) { return std::floor(x); }
inline Rational floor_value(const Rational& q) {
  mpz_class f;
  mpz_fdiv_q(f.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return Rational(f);
}

/// Reduces a width coordinate onto the circle [0, 1).
template <TilerScalar S>
S wrap_unit(const S& x) {
  S r = x - floor_value(x);
  if constexpr (!is_exact_v<S>) {
    if (r >= 1.0) r = 0.0;
  }
  return r;
}

}  // namespace tiler

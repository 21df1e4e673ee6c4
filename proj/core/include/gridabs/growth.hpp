/*
 * growth.hpp
 *
 * Growth bounds of the form beta(r,u) = e^{L tau} r + v and the predictor data
 * (A, p) derived from them.
 */
#pragma once

#include <cstddef>
#include <cstdint>

#include "gridabs/numat.hpp"

namespace gridabs {

/*
 * One growth bound per input symbol.
 *
 * L essentially nonnegative, v >= 0, tau > 0. The struct is a plain aggregate
 * so tests can build corrupted bounds; use make_growth_bound() or validate()
 * to enforce the invariants.
 */
struct GrowthBound {
  Matrix L;
  Vector v;
  double tau = 0.0;

  std::size_t dimension() const { return static_cast<std::size_t>(L.rows()); }
  void validate() const;
};

GrowthBound make_growth_bound(Matrix l, Vector v, double tau);

/* A = I + e^{L tau}, p = 2(Az + v) */
struct PredictorTerm {
  Matrix A;
  Vector p;

  std::size_t dimension() const { return static_cast<std::size_t>(A.rows()); }
  /* A >= 0 with positive diagonal, p >= 0, matching shapes */
  void validate() const;
};

/* e^{L tau} r + v for r >= 0 */
Vector eval_growth(const GrowthBound& gb, const Vector& r);

PredictorTerm to_predictor_term(const GrowthBound& gb, const Vector& z);

/* v = (\int_0^tau e^{Ls} ds) w */
Vector disturbance_offset(const Matrix& l, const Vector& w, double tau);

/*
 * Sampled check of beta(r) >= beta(r') whenever r >= r' >= 0.
 * Half the trials perturb a single coordinate so a negative entry of the
 * transition matrix is always exposed. Does not validate gb.
 */
bool check_growth_monotone(const GrowthBound& gb, std::size_t trials, std::uint64_t seed);

}  // namespace gridabs

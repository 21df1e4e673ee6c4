/*
 * growth.cpp
 */
#include "gridabs/growth.hpp"

#include <cmath>

#include "gridabs/errors.hpp"
#include "gridabs/random.hpp"

namespace gridabs {

void GrowthBound::validate() const {
  if (L.rows() != L.cols() || L.rows() < 1)
    throw InvalidArgument("growth bound: L must be square and nonempty");
  if (v.size() != L.rows()) throw InvalidArgument("growth bound: v must have length n");
  if (!L.allFinite() || !v.allFinite()) throw InvalidArgument("growth bound: entries must be finite");
  if (!is_essentially_nonnegative(L))
    throw InvalidArgument("growth bound: L must be essentially nonnegative");
  if ((v.array() < 0.0).any()) throw InvalidArgument("growth bound: v must be nonnegative");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw InvalidArgument("growth bound: tau must be positive and finite");
}

GrowthBound make_growth_bound(Matrix l, Vector v, double tau) {
  GrowthBound gb{std::move(l), std::move(v), tau};
  gb.validate();
  return gb;
}

void PredictorTerm::validate() const {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw InvalidArgument("predictor term: A must be square and nonempty");
  if (p.size() != A.rows()) throw InvalidArgument("predictor term: p must have length n");
  if (!A.allFinite() || !p.allFinite()) throw InvalidArgument("predictor term: entries must be finite");
  if ((A.array() < 0.0).any()) throw InvalidArgument("predictor term: A must be nonnegative");
  if (!(A.diagonal().array() > 0.0).all())
    throw InvalidArgument("predictor term: A must have a positive diagonal");
  if ((p.array() < 0.0).any()) throw InvalidArgument("predictor term: p must be nonnegative");
}

Vector eval_growth(const GrowthBound& gb, const Vector& r) {
  if (r.size() != gb.L.rows()) throw InvalidArgument("eval_growth: r must have length n");
  if ((r.array() < 0.0).any()) throw InvalidArgument("eval_growth: r must be nonnegative");
  return expm(gb.L, gb.tau) * r + gb.v;
}

PredictorTerm to_predictor_term(const GrowthBound& gb, const Vector& z) {
  gb.validate();
  const auto n = gb.L.rows();
  if (z.size() != n) throw InvalidArgument("to_predictor_term: z must have length n");
  if ((z.array() < 0.0).any()) throw InvalidArgument("to_predictor_term: z must be nonnegative");
  PredictorTerm t;
  t.A = Matrix::Identity(n, n) + expm(gb.L, gb.tau);
  t.p = 2.0 * (t.A * z + gb.v);
  return t;
}

Vector disturbance_offset(const Matrix& l, const Vector& w, double tau) {
  if (l.rows() != l.cols() || w.size() != l.rows())
    throw InvalidArgument("disturbance_offset: shape mismatch");
  if (!is_essentially_nonnegative(l))
    throw InvalidArgument("disturbance_offset: L must be essentially nonnegative");
  if ((w.array() < 0.0).any()) throw InvalidArgument("disturbance_offset: w must be nonnegative");
  Vector v = integral_expm(l, tau) * w;
  /* the integral of a nonnegative matrix function is nonnegative; clear
   * roundoff-level negatives */
  return v.cwiseMax(0.0);
}

bool check_growth_monotone(const GrowthBound& gb, std::size_t trials, std::uint64_t seed) {
  const auto n = gb.L.rows();
  const Matrix phi = expm(gb.L, gb.tau);
  Rng rng(seed);
  Vector lower(n), upper(n);
  for (std::size_t k = 0; k < trials; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) lower(i) = rng.uniform(0.0, 10.0);
    upper = lower;
    if (k % 2 == 0) {
      upper(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(n)))) += rng.uniform(0.0, 10.0);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) upper(i) += rng.uniform(0.0, 10.0);
    }
    const Vector hi = phi * upper + gb.v;
    const Vector lo = phi * lower + gb.v;
    /* roundoff slack relative to the magnitudes involved */
    const double slack = 1e-12 * (1.0 + hi.cwiseAbs().maxCoeff());
    if (((hi - lo).array() < -slack).any()) return false;
  }
  return true;
}

}  // namespace gridabs

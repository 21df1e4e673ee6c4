/*
 * predictor.hpp
 *
 * Prediction of the number of transitions of an abstraction before it is
 * built.
 *
 * For one input symbol with predictor data (A, p) the expected number of
 * successor cells of a cell is
 *
 *   E(eta) = prod_i (p_i + sum_j A_ij eta_j) / eta_i
 *
 * and for a family of growth bounds the per-cell prediction is the sum of
 * the individual E. The formula assumes the image of a cell center is
 * uniformly distributed relative to the grid; flows that keep centers on the
 * lattice (f = 0 is the extreme case) are adversarial because boundary
 * contacts of the closed cells count as extra successors.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "gridabs/growth.hpp"

namespace gridabs {

/* cell edge lengths, all strictly positive and finite */
class GridParameter {
 public:
  explicit GridParameter(Vector eta);

  const Vector& eta() const { return eta_; }
  std::size_t dimension() const { return static_cast<std::size_t>(eta_.size()); }
  double operator[](std::size_t i) const { return eta_(static_cast<Eigen::Index>(i)); }
  /* product of edge lengths */
  double volume() const { return eta_.prod(); }

 private:
  Vector eta_;
};

double predict_single(const PredictorTerm& term, const GridParameter& eta);

double predict_family(std::span<const PredictorTerm> terms, const GridParameter& eta);

/* num_cells * predict_family(terms, eta) */
double predict_abstraction_total(std::span<const PredictorTerm> terms, const GridParameter& eta,
                                 std::uint64_t num_cells);

/* expected number of lattice points of eta Z^n in c + [-r, r] for uniform c: prod 2 r_i / eta_i */
double exact_expected_cells(const GridParameter& eta, const Vector& r);

/* number of points of eta Z^n in the closed box c + [-r, r] */
std::uint64_t lattice_points_in_box(const GridParameter& eta, const Vector& c, const Vector& r);

/*
 * Monte Carlo estimate of exact_expected_cells with c_i uniform on [0, eta_i).
 *
 * Samples are split into fixed shards of 65536, shard k drawing from
 * Rng::stream(seed, k); integer counts are summed, so the result depends only
 * on (eta, r, samples, seed), not on `threads`.
 */
double mc_expected_cells(const GridParameter& eta, const Vector& r, std::uint64_t samples,
                         std::uint64_t seed, unsigned threads = 1);

}  // namespace gridabs

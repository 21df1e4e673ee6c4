/*
 * models.hpp
 *
 * Built-in plants:
 *
 *   linear                x' = M x + B u
 *   decoupled             x_i' = a_i x_i + u_i
 *   double_pendulum_cart  state (phi1, phi2, phi1', phi2'), input = cart
 *                         acceleration; angles from the upright position
 *
 * For linear and decoupled the growth matrix follows from the dynamics; the
 * pendulum needs L (and optionally v) per input from the caller.
 */
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridabs/abstraction.hpp"

namespace gridabs {

/* numeric parameter: scalar (1x1), vector (n x 1) or matrix, row-major values */
struct Param {
  std::size_t rows = 1;
  std::size_t cols = 1;
  std::vector<double> values;

  static Param scalar(double x);
  static Param vector(std::vector<double> x);
  static Param matrix(const Matrix& m);

  Matrix as_matrix() const;
  Vector as_vector() const;
  double as_scalar() const;
};

struct GrowthOverride {
  Matrix L;
  /* default: disturbance_offset(L, w, tau) */
  std::optional<Vector> v;
};

struct ModelSpec {
  std::string name;
  std::map<std::string, Param> params;
  std::vector<Vector> inputs;
  double tau = 0.0;
  Vector w;
  Vector z;
  /* empty, one entry for all inputs, or one per input */
  std::vector<GrowthOverride> growth;
};

std::vector<std::string> registered_models();

/* throws InvalidArgument for unknown names and missing or invalid parameters */
Plant lookup(const ModelSpec& spec);

/* L_ii = M_ii, L_ij = |M_ij| */
Matrix linear_growth_matrix(const Matrix& m);

/* grid of inputs, counts[i] >= 1 points per axis, dimension 0 fastest */
std::vector<Vector> linspace_inputs(const Vector& lower, const Vector& upper,
                                    const std::vector<std::size_t>& counts);

/* e^{M tau} x0 + int_0^tau e^{M s} ds B u */
Vector linear_flow_exact(const Matrix& m, const Matrix& b, const Vector& x0, const Vector& u,
                         double tau);

}  // namespace gridabs

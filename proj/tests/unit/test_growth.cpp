#include <doctest.h>

#include "gridabs/errors.hpp"
#include "gridabs/growth.hpp"
#include "oracles.hpp"

using namespace gridabs;

TEST_SUITE("growth") {

TEST_CASE("eval_growth examples") {
  const GrowthBound id = make_growth_bound(Matrix::Zero(2, 2), Vector::Zero(2), 1.0);
  CHECK(eval_growth(id, Vector{{1.0, 2.0}}) == Vector{{1.0, 2.0}});
  const GrowthBound shift = make_growth_bound(Matrix::Zero(2, 2), Vector::Constant(2, 0.1), 1.0);
  CHECK(eval_growth(shift, Vector::Zero(2)) == Vector::Constant(2, 0.1));
  const GrowthBound dbl = make_growth_bound(Matrix::Identity(1, 1), Vector::Zero(1), std::log(2.0));
  CHECK(eval_growth(dbl, Vector::Constant(1, 3.0))(0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK_THROWS_AS(eval_growth(id, Vector{{-1.0, 0.0}}), InvalidArgument);
  CHECK_THROWS_AS(eval_growth(id, Vector::Zero(3)), InvalidArgument);
}

TEST_CASE("growth bound validation") {
  CHECK_THROWS_AS(make_growth_bound(Matrix{{0.0, -1.0}, {0.0, 0.0}}, Vector::Zero(2), 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_growth_bound(Matrix::Zero(2, 2), Vector{{-0.1, 0.0}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(make_growth_bound(Matrix::Zero(2, 2), Vector::Zero(2), 0.0), InvalidArgument);
  CHECK_THROWS_AS(make_growth_bound(Matrix::Zero(2, 2), Vector::Zero(3), 1.0), InvalidArgument);
}

TEST_CASE("predictor term examples") {
  const auto t0 = to_predictor_term(make_growth_bound(Matrix::Zero(2, 2), Vector::Zero(2), 0.37), Vector::Zero(2));
  CHECK(t0.A == 2.0 * Matrix::Identity(2, 2));
  CHECK(t0.p == Vector::Zero(2));
  const auto t1 =
      to_predictor_term(make_growth_bound(Matrix::Zero(2, 2), Vector{{1.0, 0.0}}, 1.0), Vector{{0.5, 0.0}});
  CHECK(t1.p == Vector{{4.0, 0.0}});
  const auto t2 = to_predictor_term(make_growth_bound(Matrix::Constant(1, 1, std::log(2.0)), Vector::Zero(1), 1.0),
                                    Vector::Ones(1));
  CHECK(t2.A(0, 0) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(t2.p(0) == doctest::Approx(6.0).epsilon(1e-15));
  CHECK_THROWS_AS(to_predictor_term(make_growth_bound(Matrix::Zero(1, 1), Vector::Zero(1), 1.0), Vector{{-1.0}}),
                  InvalidArgument);
}

TEST_CASE("predictor terms have diagonal above one and satisfy A = I + e^{L tau}, p = 2(Az + v)") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
    const Matrix l = oracle::random_essentially_nonnegative(rng, n, 0.5);
    Vector v(n), z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v(i) = rng.uniform(0, 1);
      z(i) = rng.coin(0.3) ? 0.0 : rng.uniform(0, 0.1);
    }
    const double tau = rng.uniform(0.01, 2.0);
    const auto t = to_predictor_term(make_growth_bound(l, v, tau), z);
    CHECK((t.A.diagonal().array() > 1.0).all());
    CHECK_NOTHROW(t.validate());
    const Matrix a_ref = Matrix::Identity(n, n) + oracle::expm(l, tau);
    CHECK((t.A - a_ref).cwiseAbs().maxCoeff() <= 1e-10 * a_ref.cwiseAbs().maxCoeff());
    const Vector p_ref = 2.0 * (a_ref * z + v);
    CHECK((t.p - p_ref).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, p_ref.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("disturbance offset examples") {
  CHECK(disturbance_offset(Matrix::Zero(2, 2), Vector{{1.0, 2.0}}, 0.5).isApprox(Vector{{0.5, 1.0}}, 1e-15));
  Rng rng(22);
  const Matrix l = oracle::random_essentially_nonnegative(rng, 3, 0.2);
  CHECK(disturbance_offset(l, Vector::Zero(3), 0.7) == Vector::Zero(3));
  CHECK(disturbance_offset(Matrix::Identity(1, 1), Vector::Ones(1), 1.0)(0) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(disturbance_offset(Matrix{{0.0, -1.0}, {0.0, 0.0}}, Vector::Ones(2), 1.0), InvalidArgument);
  CHECK_THROWS_AS(disturbance_offset(Matrix::Zero(2, 2), Vector{{-1.0, 0.0}}, 1.0), InvalidArgument);
}

TEST_CASE("disturbance offset is tau w to first order") {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(4));
    Matrix l = oracle::random_essentially_nonnegative(rng, n, 0.3);
    const double tau = 1e-6 / std::max(1e-300, l.cwiseAbs().rowwise().sum().maxCoeff()) * rng.uniform(0.1, 1.0);
    Vector w(n);
    for (Eigen::Index i = 0; i < n; ++i) w(i) = rng.uniform(0.1, 1);
    const Vector v = disturbance_offset(l, w, tau);
    CHECK(((v - tau * w).cwiseAbs().array() / (tau * w).array()).maxCoeff() <= 1e-5);
  }
}

TEST_CASE("monotonicity self-check") {
  Rng rng(24);
  for (int trial = 0; trial < 20; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
    const GrowthBound gb =
        make_growth_bound(oracle::random_essentially_nonnegative(rng, n, 0.5), Vector::Ones(n), rng.uniform(0.1, 1));
    CHECK(check_growth_monotone(gb, 1000, rng.next()));
  }
  CHECK(check_growth_monotone(make_growth_bound(Matrix::Zero(3, 3), Vector::Zero(3), 1.0), 1000, 1));
  GrowthBound corrupt{Matrix{{0.0, -5.0}, {0.0, 0.0}}, Vector::Zero(2), 1.0};
  CHECK_FALSE(check_growth_monotone(corrupt, 1000, 2));
}

TEST_CASE("eval_growth is monotone in r") {
  Rng rng(25);
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = static_cast<Eigen::Index>(1 + rng.index(5));
    const GrowthBound gb = make_growth_bound(oracle::random_essentially_nonnegative(rng, n, 0.5),
                                             Vector::Constant(n, 0.1), rng.uniform(0.01, 1));
    Vector r(n), dr(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      r(i) = rng.uniform(0, 2);
      dr(i) = rng.coin(0.5) ? 0.0 : rng.uniform(0, 1);
    }
    CHECK(((eval_growth(gb, r + dr) - eval_growth(gb, r)).array() >= 0.0).all());
  }
}

}

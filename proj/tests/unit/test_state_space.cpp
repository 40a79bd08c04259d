#include "lowmach/error.hpp"
#include "lowmach/state_space.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lowmach;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

Params gas(double gamma, double eps, double rho_bar = 1.0) {
  Params p;
  p.gamma = gamma;
  p.eps = eps;
  p.rho_bar = rho_bar;
  return p;
}

CompressibleState cs(double rho, VectorXd u) { return {rho, std::move(u)}; }

}  // namespace

TEST_CASE("layout dimensions") {
  CHECK(sym0_dim(2) == 2);
  CHECK(sym0_dim(3) == 5);
  CHECK(relaxed_dim(2) == 6);
  CHECK(relaxed_dim(3) == 10);
  const auto layout = sym0_layout(3);
  REQUIRE(layout.size() == 5);
  CHECK(layout[0] == std::pair{0, 0});
  CHECK(layout[1] == std::pair{0, 1});
  CHECK(layout[3] == std::pair{1, 1});
  CHECK(layout[4] == std::pair{1, 2});
}

TEST_CASE("ocircle examples") {
  CHECK(ocircle(Vector2d(0, 0), 2).matrix().isZero());
  const Eigen::MatrixXd a = ocircle(Vector2d(1, 0), 2).matrix();
  CHECK(a(0, 0) == doctest::Approx(0.5));
  CHECK(a(1, 1) == doctest::Approx(-0.5));
  CHECK(a(0, 1) == 0.0);
  const Eigen::MatrixXd b = ocircle(Vector2d(1, 1), 2).matrix();
  CHECK(b(0, 0) == 0.0);
  CHECK(b(1, 1) == 0.0);
  CHECK(b(0, 1) == 1.0);
  CHECK(b(1, 0) == 1.0);
}

TEST_CASE("trace-free storage holds exactly") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-5, 5);
  for (int d : {2, 3}) {
    for (int trial = 0; trial < 200; ++trial) {
      VectorXd v(d);
      for (int i = 0; i < d; ++i) v(i) = U(rng);
      const Eigen::MatrixXd m = ocircle(v, d).matrix();
      double tr = 0.0;
      for (int i = 0; i < d; ++i) tr += m(i, i);
      CHECK(std::abs(tr) <= 1e-14 * v.squaredNorm());
      CHECK((m - m.transpose()).norm() == 0.0);
    }
  }
}

TEST_CASE("TraceFreeSym rejects non-trace-free input") {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 0, 1;
  CHECK_THROWS_AS(TraceFreeSym::from_matrix(m), ValidationError);
  m << 1, 2, 3, -1;
  CHECK_THROWS_AS(TraceFreeSym::from_matrix(m), ValidationError);
}

TEST_CASE("lift_S examples") {
  const RelaxedState zero = lift_S({Vector2d(0, 0), 0.0});
  VectorXd expect = VectorXd::Zero(6);
  expect(0) = 1.0;
  CHECK(zero.vector() == expect);

  const RelaxedState a = lift_S({Vector2d(1, 0), 1.0});
  CHECK(a.rho() == 1.0);
  CHECK(a.m() == VectorXd(Vector2d(1, 0)));
  CHECK(a.M()(0, 0) == doctest::Approx(0.5));
  CHECK(a.M()(1, 1) == doctest::Approx(-0.5));
  CHECK(a.Q() == doctest::Approx(1.5));

  const RelaxedState b = lift_S({Vector2d(0, 1), -0.5});
  CHECK(b.M()(0, 0) == doctest::Approx(-0.5));
  CHECK(b.M()(1, 1) == doctest::Approx(0.5));
  CHECK(b.Q() == doctest::Approx(0.0));
}

TEST_CASE("lift_S matches the hand-assembled vector") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-3, 3);
  for (int d : {2, 3})
    for (int trial = 0; trial < 100; ++trial) {
      VectorXd u(d);
      for (int i = 0; i < d; ++i) u(i) = U(rng);
      const double P = U(rng);
      CHECK((lift_S({u, P}).vector() - oracle::lift_S(u, P)).norm() <= 1e-13);
    }
}

TEST_CASE("lift_Theta examples") {
  const RelaxedState a = lift_Theta(cs(1.0, Vector2d(0, 0)), gas(2.0, 1.0));
  VectorXd expect = VectorXd::Zero(6);
  expect(0) = 1.0;
  expect(5) = 1.0;
  CHECK((a.vector() - expect).norm() <= 1e-15);

  const RelaxedState b = lift_Theta(cs(0.3, Vector2d(0, 0)), gas(1.4, 0.2));
  CHECK(b.m().isZero());
  CHECK(b.M().components().isZero());

  const RelaxedState c = lift_Theta(cs(1.0, Vector2d(1, 0)), gas(2.0, 0.5));
  CHECK(c.Q() == doctest::Approx(2.5));

  CHECK_THROWS_AS(lift_Theta(cs(0.0, Vector2d(0, 0)), gas(2.0, 1.0)), ValidationError);
  CHECK_THROWS_AS(lift_Theta(cs(-1.0, Vector2d(0, 0)), gas(2.0, 1.0)), ValidationError);
}

TEST_CASE("lift_C examples and offset identity") {
  const Params p = gas(2.0, 0.01);
  const RelaxedState a = lift_C(cs(1.0, Vector2d(0, 0)), p);
  VectorXd expect = VectorXd::Zero(6);
  expect(0) = 1.0;
  CHECK((a.vector() - expect).norm() == 0.0);

  CHECK(lift_C(cs(1.1, Vector2d(0, 0)), p).Q() == doctest::Approx(21.0).epsilon(1e-12));

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-2, 2), R(0.5, 1.5);
  for (int trial = 0; trial < 100; ++trial) {
    const Params q = gas(1.0 + R(rng), R(rng), R(rng));
    const CompressibleState s = cs(R(rng), Vector2d(U(rng), U(rng)));
    VectorXd diff = lift_Theta(s, q).vector() - lift_C(s, q).vector();
    CHECK(diff.head(5).norm() == 0.0);
    CHECK(diff(5) == doctest::Approx(std::pow(q.rho_bar, q.gamma) / q.eps).epsilon(1e-12));
  }
}

TEST_CASE("lift_T and lift_P") {
  const Params p = gas(2.0, 0.01);
  CHECK(lift_T(cs(1.0, Vector2d(0.3, 0.1)), p).p == 0.0);
  const PressureLiftTriple t = lift_T(cs(1.1, Vector2d(1, 0)), p);
  CHECK(t.rho == 1.1);
  CHECK(t.p == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(t.p == doctest::Approx(lift_C(cs(1.1, Vector2d(0, 0)), p).Q() / p.rho_bar).epsilon(1e-14));

  const AugmentedState a = lift_P(cs(1.1, Vector2d(1, 0)), p);
  CHECK(a.u == VectorXd(Vector2d(1, 0)));
  CHECK(a.P == doctest::Approx(21.0).epsilon(1e-12));
  CHECK(a.P == t.p);
  CHECK(lift_P(cs(1.0, Vector2d(4, -2)), p).P == 0.0);
}

TEST_CASE("consistency at reference density") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> U(-3, 3), R(0.5, 2.0);
  for (int d : {2, 3})
    for (int trial = 0; trial < 200; ++trial) {
      Params p = gas(1.0 + R(rng), R(rng) * 0.1, R(rng));
      p.d = d;
      VectorXd u(d);
      for (int i = 0; i < d; ++i) u(i) = U(rng);
      const CompressibleState s = cs(p.rho_bar, u);
      const VectorXd lhs = lift_S(lift_P(s, p)).vector();
      const VectorXd rhs = lift_C(s, p).vector() / p.rho_bar;
      CHECK((lhs - rhs).norm() <= 1e-14 * (1.0 + rhs.norm()));
    }
}

TEST_CASE("unlift_S inverts lift_S") {
  const AugmentedState s{Vector2d(0.7, -1.3), 0.25};
  const AugmentedState back = unlift_S(lift_S(s));
  CHECK((back.u - s.u).norm() <= 1e-15);
  CHECK(back.P == doctest::Approx(s.P).epsilon(1e-14));
}

TEST_CASE("lift_S is Lipschitz on bounded sets") {
  // |S(s1) - S(s2)| <= L(R) |s1 - s2| with L(R) = 1 + 4R on the ball of radius R
  std::mt19937_64 rng(23);
  const double R = 2.0;
  std::uniform_real_distribution<double> U(-R / 2, R / 2);
  double worst = 0.0;
  for (int trial = 0; trial < 5000; ++trial) {
    const AugmentedState a{Vector2d(U(rng), U(rng)), U(rng)};
    const AugmentedState b{Vector2d(U(rng), U(rng)), U(rng)};
    VectorXd da(3), db(3);
    da << a.u, a.P;
    db << b.u, b.P;
    worst = std::max(worst, (lift_S(a).vector() - lift_S(b).vector()).norm() / (da - db).norm());
  }
  CHECK(worst <= 1.0 + 4.0 * R);
}

TEST_CASE("pow_difference and taylor_remainder near the reference") {
  CHECK(pow_difference(1.0, 1.0, 2.0) == 0.0);
  CHECK(pow_difference(1.1, 1.0, 2.0) == doctest::Approx(0.21).epsilon(1e-14));
  CHECK(pow_difference(1.0 + 1e-12, 1.0, 1.4) == doctest::Approx(1.4e-12).epsilon(1e-9));
  for (double dr : {1e-1, 1e-4, 1e-8, 1e-12}) {
    const double rho = 1.0 + dr;
    CHECK(taylor_remainder(rho, 1.0, 2.0) == doctest::Approx(dr * dr).epsilon(1e-13));
    CHECK(pressure_lift(rho, gas(2.0, 0.01)) == doctest::Approx((2.0 * dr + dr * dr) / 0.01).epsilon(1e-13));
  }
}

TEST_CASE("gamma = 2 lift gap identity") {
  for (double rho : {0.5, 0.9, 0.999, 1.001, 1.3}) {
    const Params p = gas(2.0, 0.01);
    const double gap = pressure_lift(rho, p) - 2.0 * (rho - 1.0) / p.eps;
    CHECK(gap == doctest::Approx(oracle::taylor_gap_gamma2(rho, 1.0, p.eps)).epsilon(1e-12));
  }
}

TEST_CASE("params validation") {
  CHECK_THROWS_AS(gas(1.0, 1.0).validate(), ValidationError);
  CHECK_THROWS_AS(gas(2.0, 0.0).validate(), ValidationError);
  CHECK_THROWS_AS(gas(2.0, 1.0, -1.0).validate(), ValidationError);
  CHECK(Params::monoatomic(2, 0.1).gamma == 2.0);
  CHECK(Params::monoatomic(3, 0.1).gamma == doctest::Approx(5.0 / 3.0));
}

#include "lowmach/error.hpp"
#include "lowmach/relaxed_operator.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace lowmach;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;

namespace {

VectorXd random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> G(0.0, scale);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = G(rng);
  return v;
}

double sine(double s) { return std::sin(2.0 * std::numbers::pi * s); }

}  // namespace

TEST_CASE("symbol agrees with the componentwise formula") {
  std::mt19937_64 rng(1);
  for (int d : {2, 3}) {
    const OperatorAE op(d);
    CHECK(op.N() == relaxed_dim(d));
    for (int trial = 0; trial < 200; ++trial) {
      const VectorXd eta = random_vector(rng, d + 1);
      const VectorXd z = random_vector(rng, op.N());
      CHECK((op.symbol(eta) * z - oracle::apply_symbol(d, eta, z)).norm() <= 1e-13 * (1 + z.norm() * eta.norm()));
      CHECK((op.contraction(z) * eta - op.symbol(eta) * z).norm() <= 1e-13 * (1 + z.norm() * eta.norm()));
    }
  }
}

TEST_CASE("symbol is linear in the frequency") {
  std::mt19937_64 rng(2);
  const OperatorAE op(2);
  const VectorXd a = random_vector(rng, 3), b = random_vector(rng, 3);
  CHECK((op.symbol(2.5 * a - b) - (2.5 * op.symbol(a) - op.symbol(b))).norm() <= 1e-13);
}

TEST_CASE("constant rank d+1") {
  const OperatorAE op2(2);
  const auto r2 = constant_rank_check(op2, 10000, 7);
  CHECK(r2.constant);
  CHECK(r2.min_rank == 3);
  CHECK(r2.max_rank == 3);
  CHECK(r2.samples == 10000);
  const auto scaled = constant_rank_check(op2, 2000, 8, 1e-3);
  CHECK(scaled.min_rank == 3);
  CHECK(scaled.max_rank == 3);

  const OperatorAE op3(3);
  const auto r3 = constant_rank_check(op3, 2000, 9);
  CHECK(r3.constant);
  CHECK(r3.rank == 4);
}

TEST_CASE("kernel has dimension N - (d+1) and is annihilated") {
  std::mt19937_64 rng(3);
  for (int d : {2, 3}) {
    const OperatorAE op(d);
    for (int trial = 0; trial < 100; ++trial) {
      const VectorXd eta = random_vector(rng, d + 1);
      const MatrixXd K = op.kernel(eta);
      CHECK(K.cols() == op.N() - (d + 1));
      CHECK((K.transpose() * K - MatrixXd::Identity(K.cols(), K.cols())).norm() <= 1e-12);
      for (int j = 0; j < K.cols(); ++j) CHECK(oracle::apply_symbol(d, eta, K.col(j)).norm() <= 1e-12 * eta.norm());
    }
  }
  CHECK_THROWS_AS(OperatorAE(2).kernel(Vector3d::Zero()), ValidationError);
}

TEST_CASE("diatomic determinant matches Leibniz and the closed form") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-2, 2);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vector2d u1(U(rng), U(rng)), u2(U(rng), U(rng));
    const double P1 = U(rng), P2 = U(rng);
    const auto det = diatomic_det(lift_S({u1, P1}), lift_S({u2, P2}));
    const Eigen::Matrix3d hand = oracle::diatomic_matrix(u1, P1, u2, P2);
    CHECK((det.contraction - hand).norm() <= 1e-13);
    const double leibniz = oracle::leibniz_det(hand);
    const double closed = -(u1 - u2).squaredNorm() * (P1 - P2);
    CHECK(std::abs(det.determinant - leibniz) <= 1e-12 * std::max(1.0, std::abs(leibniz)));
    CHECK(std::abs(leibniz - closed) <= 1e-10 * std::max(1.0, std::abs(closed)));
    CHECK(det.closed_form == doctest::Approx(closed).epsilon(1e-14));
  }
}

TEST_CASE("diatomic_det rejects mismatched density slots") {
  Params p;
  p.eps = 1.0;
  const RelaxedState a = lift_S({Vector2d(1, 0), 1.0});
  const RelaxedState b = lift_C({2.0, Vector2d(0, 0)}, p);
  CHECK_THROWS_AS(diatomic_det(a, b), ValidationError);
}

TEST_CASE("wave cone membership: examples") {
  const OperatorAE op(2);
  // equal velocities, different pressures: connected along a pure time frequency
  const RelaxedState a = lift_S({Vector2d(0.5, -1), 2.0}) - lift_S({Vector2d(0.5, -1), -1.0});
  const auto ra = wave_cone_membership(op, a);
  CHECK(ra.member);
  CHECK(ra.min_singular_value <= 1e-8 * a.vector().norm());

  // different velocities and pressures: outside
  const RelaxedState b = lift_S({Vector2d(1, 0), 1.0}) - lift_S({Vector2d(0, 0), 0.0});
  const auto rb = wave_cone_membership(op, b);
  CHECK_FALSE(rb.member);
  CHECK(rb.min_singular_value == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-8));

  // kernel vectors are members
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const VectorXd eta = random_vector(rng, 3);
    const VectorXd v = op.kernel(eta) * random_vector(rng, 3);
    CHECK(wave_cone_membership(op, RelaxedState(2, v)).member);
  }
}

TEST_CASE("wave cone membership in d = 3") {
  const OperatorAE op(3);
  std::mt19937_64 rng(6);
  const VectorXd eta = random_vector(rng, 4);
  const VectorXd v = op.kernel(eta).col(0);
  WaveConeOptions o;
  o.sweep_per_angle = 16;
  CHECK(wave_cone_membership(op, RelaxedState(3, v), o).member);
}

TEST_CASE("plane-wave kernel fields have vanishing residual") {
  const OperatorAE op(2);
  for (const std::vector<int>& k : {std::vector<int>{1, 0, 1}, {0, 1, 0}, {2, -1, 1}, {1, 1, 2}}) {
    const VectorXd eta = integer_frequency(k, 0.5);
    const MatrixXd K = op.kernel(eta);
    for (int j = 0; j < K.cols(); ++j) {
      const RelaxedField f = plane_wave_field(op, k, K.col(j), sine, 8, 8, 0.5);
      const auto hand = oracle::sine_mode_field(k, K.col(j), 8, 8);
      REQUIRE(hand.size() == f.values.size());
      for (std::size_t i = 0; i < hand.size(); ++i) CHECK(std::abs(f.values[i] - hand[i]) <= 1e-14);
      CHECK(ae_residual_negative_norm(op, f) <= 1e-10);
    }
  }
  VectorXd bad = VectorXd::Zero(6);
  bad(1) = 1.0;
  CHECK_THROWS_AS(plane_wave_field(op, {0, 1, 0}, bad, sine, 8, 8, 1.0), ValidationError);
}

TEST_CASE("perturbed plane wave matches the single-mode closed form") {
  const OperatorAE op(2);
  std::mt19937_64 rng(7);
  for (const std::vector<int>& k : {std::vector<int>{1, 0, 1}, {2, -1, 1}, {0, 2, 1}}) {
    const double T = 0.5;
    const VectorXd eta = integer_frequency(k, T);
    const VectorXd a = op.kernel(eta).col(0) + 0.3 * random_vector(rng, 6);
    RelaxedField f;
    f.nt = 8;
    f.n = 8;
    f.T = T;
    f.values = oracle::sine_mode_field(k, a, 8, 8);
    const double residual = ae_residual_negative_norm(op, f);
    const double closed = std::sqrt(T / 2.0) * (op.symbol(eta) * a).norm() / eta.norm();
    CHECK(residual == doctest::Approx(closed).epsilon(1e-10));
    CHECK(residual == doctest::Approx(oracle::direct_negative_norm(2, 8, 8, T, f.values)).epsilon(1e-10));
  }
}

TEST_CASE("residual agrees with a direct DFT on band-limited random fields") {
  const OperatorAE op(2);
  std::mt19937_64 rng(8);
  const int nt = 8, n = 8;
  const double T = 1.3;
  RelaxedField f;
  f.d = 2;
  f.nt = nt;
  f.n = n;
  f.T = T;
  f.values.assign(static_cast<std::size_t>(nt * n * n * 6), 0.0);
  for (int mode = 0; mode < 4; ++mode) {
    std::uniform_int_distribution<int> K(-2, 2);
    const int kt = K(rng), kx = K(rng), ky = K(rng);
    const VectorXd a = random_vector(rng, 6);
    const double phase = random_vector(rng, 1)(0);
    for (int j = 0; j < nt; ++j)
      for (int ix = 0; ix < n; ++ix)
        for (int iy = 0; iy < n; ++iy) {
          const double s = static_cast<double>(kt) * j / nt + kx * (ix + 0.5) / n + ky * (iy + 0.5) / n;
          const double w = std::cos(2 * std::numbers::pi * s + phase);
          for (int c = 0; c < 6; ++c) f.values[static_cast<std::size_t>(((j * n + ix) * n + iy) * 6 + c)] += w * a(c);
        }
  }
  CHECK(ae_residual_negative_norm(op, f) == doctest::Approx(oracle::direct_negative_norm(2, nt, n, T, f.values)).epsilon(1e-10));
}

TEST_CASE("constant fields have zero residual") {
  const OperatorAE op(2);
  RelaxedField f;
  f.nt = 8;
  f.n = 4;
  f.T = 1.0;
  f.n = 8;
  f.values.assign(static_cast<std::size_t>(f.total_points() * 6), 0.0);
  for (long i = 0; i < f.total_points(); ++i) f.values[static_cast<std::size_t>(i * 6)] = 1.0;
  CHECK(ae_residual_negative_norm(op, f) <= 1e-12);
}

TEST_CASE("to_json of a wave-cone report") {
  const OperatorAE op(2);
  const RelaxedState b = lift_S({Vector2d(1, 0), 1.0}) - lift_S({Vector2d(0, 0), 0.0});
  const auto j = to_json(wave_cone_membership(op, b));
  CHECK(j.at("member") == false);
  CHECK(j.at("best_direction").size() == 3);
}

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

namespace oracle {

Eigen::VectorXd relaxed_vector(int d, double rho, const Eigen::VectorXd& m, const Eigen::MatrixXd& M, double Q) {
  std::vector<double> z{rho};
  for (int i = 0; i < d; ++i) z.push_back(m(i));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      if (!(i == d - 1 && j == d - 1)) z.push_back(M(i, j));
  z.push_back(Q);
  return Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size()));
}

Eigen::VectorXd lift_S(const Eigen::VectorXd& u, double P) {
  const int d = static_cast<int>(u.size());
  const double u2 = u.squaredNorm();
  Eigen::MatrixXd M = u * u.transpose();
  for (int i = 0; i < d; ++i) M(i, i) -= u2 / d;
  return relaxed_vector(d, 1.0, u, M, P + u2 / d);
}

Eigen::VectorXd apply_symbol(int d, const Eigen::VectorXd& eta, const Eigen::VectorXd& z) {
  const double rho = z(0);
  const Eigen::VectorXd m = z.segment(1, d);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(d, d);
  int c = 1 + d;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      if (i == d - 1 && j == d - 1) continue;
      M(i, j) = z(c);
      M(j, i) = z(c);
      ++c;
    }
  double trace = 0.0;
  for (int i = 0; i < d - 1; ++i) trace += M(i, i);
  M(d - 1, d - 1) = -trace;
  const double Q = z(c);
  const double tau = eta(0);
  const Eigen::VectorXd xi = eta.tail(d);
  Eigen::VectorXd out(d + 1);
  out.head(d) = tau * m + M * xi + Q * xi;
  out(d) = tau * rho + xi.dot(m);
  return out;
}

double leibniz_det(const Eigen::Matrix3d& a) {
  int perm[3] = {0, 1, 2};
  double det = 0.0;
  do {
    int inversions = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j)
        if (perm[i] > perm[j]) ++inversions;
    const double sign = inversions % 2 == 0 ? 1.0 : -1.0;
    det += sign * a(0, perm[0]) * a(1, perm[1]) * a(2, perm[2]);
  } while (std::next_permutation(perm, perm + 3));
  return det;
}

Eigen::Matrix3d diatomic_matrix(const Eigen::Vector2d& u1, double P1, const Eigen::Vector2d& u2, double P2) {
  const Eigen::VectorXd dz = lift_S(u1, P1) - lift_S(u2, P2);
  Eigen::Matrix3d a;
  for (int l = 0; l < 3; ++l) a.col(l) = apply_symbol(2, Eigen::Vector3d::Unit(l), dz);
  return a;
}

double vortex_pressure(double A, double x, double y) {
  const double w = 2.0 * std::numbers::pi * A;
  return w * w * (std::cos(4.0 * std::numbers::pi * x) + std::cos(4.0 * std::numbers::pi * y)) / 4.0;
}

double lower_hull_brute(const std::vector<double>& s, const std::vector<double>& g, double at) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == at) best = std::min(best, g[i]);
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (!(s[i] < at && at < s[j])) continue;
      const double lam = (s[j] - at) / (s[j] - s[i]);
      best = std::min(best, lam * g[i] + (1.0 - lam) * g[j]);
    }
  }
  return best;
}

double direct_negative_norm(int d, int nt, int n, double T, const std::vector<double>& values) {
  const int N = 1 + d + d * (d + 1) / 2 - 1 + 1;
  long S = 1;
  for (int a = 0; a < d; ++a) S *= n;
  const long total = S * nt;
  auto signed_k = [](int i, int len) { return i <= len / 2 ? i : i - len; };
  std::vector<int> idx(static_cast<std::size_t>(d));
  auto unravel = [&](long s) {
    for (int a = d - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = static_cast<int>(s % n);
      s /= n;
    }
  };
  double sum = 0.0;
  std::vector<int> kx(static_cast<std::size_t>(d));
  for (int kt_i = 0; kt_i < nt; ++kt_i)
    for (long ks = 0; ks < S; ++ks) {
      unravel(ks);
      for (int a = 0; a < d; ++a) kx[static_cast<std::size_t>(a)] = signed_k(idx[static_cast<std::size_t>(a)], n);
      const int kt = signed_k(kt_i, nt);
      bool zero = kt == 0;
      for (int a = 0; a < d; ++a) zero = zero && kx[static_cast<std::size_t>(a)] == 0;
      if (zero) continue;
      std::vector<std::complex<double>> zhat(static_cast<std::size_t>(N));
      for (int j = 0; j < nt; ++j)
        for (long s = 0; s < S; ++s) {
          unravel(s);
          double phase = static_cast<double>(kt) * j / nt;
          for (int a = 0; a < d; ++a) phase += kx[static_cast<std::size_t>(a)] * (idx[static_cast<std::size_t>(a)] + 0.5) / n;
          const std::complex<double> e = std::polar(1.0, -2.0 * std::numbers::pi * phase);
          for (int c = 0; c < N; ++c) zhat[static_cast<std::size_t>(c)] += values[static_cast<std::size_t>((j * S + s) * N + c)] * e;
        }
      Eigen::VectorXd re(N), im(N);
      for (int c = 0; c < N; ++c) {
        re(c) = zhat[static_cast<std::size_t>(c)].real() / static_cast<double>(total);
        im(c) = zhat[static_cast<std::size_t>(c)].imag() / static_cast<double>(total);
      }
      Eigen::VectorXd eta(d + 1);
      eta(0) = 2.0 * std::numbers::pi * kt / T;
      for (int a = 0; a < d; ++a) eta(a + 1) = 2.0 * std::numbers::pi * kx[static_cast<std::size_t>(a)];
      sum += (apply_symbol(d, eta, re).squaredNorm() + apply_symbol(d, eta, im).squaredNorm()) / eta.squaredNorm();
    }
  return std::sqrt(T * sum);
}

std::vector<double> sine_mode_field(const std::vector<int>& k, const Eigen::VectorXd& a, int nt, int n) {
  const int d = static_cast<int>(k.size()) - 1;
  const auto N = static_cast<long>(a.size());
  long S = 1;
  for (int ax = 0; ax < d; ++ax) S *= n;
  std::vector<double> values(static_cast<std::size_t>(S * nt * N));
  for (int j = 0; j < nt; ++j)
    for (long s = 0; s < S; ++s) {
      double phase = static_cast<double>(k[0]) * j / nt;
      long rem = s;
      for (int ax = d - 1; ax >= 0; --ax) {
        phase += k[static_cast<std::size_t>(ax + 1)] * (static_cast<double>(rem % n) + 0.5) / n;
        rem /= n;
      }
      const double w = std::sin(2.0 * std::numbers::pi * phase);
      for (long c = 0; c < N; ++c) values[static_cast<std::size_t>((j * S + s) * N + c)] = w * a(c);
    }
  return values;
}

double taylor_gap_gamma2(double rho, double rho_bar, double eps) {
  return (rho * rho - rho_bar * rho_bar) / (eps * rho_bar) - 2.0 * (rho - rho_bar) / eps;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i] / n;
    my += y[i] / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / (2 * panels);
  double sum = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

}  // namespace oracle

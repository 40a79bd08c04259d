#include "lowmach/relaxed_operator.hpp"

#include "lowmach/error.hpp"
#include "lowmach/quadrature.hpp"
#include "lowmach/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace lowmach {

using std::numbers::pi;

OperatorAE::OperatorAE(int d) : d_(d) {
  require(d >= 2, "the relaxed operator needs d >= 2", "d");
  const int N = relaxed_dim(d);
  const int rows = d + 1;
  const int mOff = 1 + d;
  const int qCol = N - 1;
  const auto layout = sym0_layout(d);

  A_.assign(static_cast<std::size_t>(d + 1), Eigen::MatrixXd::Zero(rows, N));
  for (int i = 0; i < d; ++i) A_[0](i, 1 + i) = 1.0;
  A_[0](d, 0) = 1.0;

  for (int a = 0; a < d; ++a) {
    Eigen::MatrixXd& A = A_[static_cast<std::size_t>(a + 1)];
    for (int i = 0; i < d; ++i) {
      // coefficient of xi_a in (M xi)_i
      if (i == d - 1 && a == d - 1) {
        for (std::size_t c = 0; c < layout.size(); ++c)
          if (layout[c].first == layout[c].second) A(i, mOff + static_cast<int>(c)) -= 1.0;
      } else {
        const int r = std::min(i, a);
        const int s = std::max(i, a);
        for (std::size_t c = 0; c < layout.size(); ++c)
          if (layout[c].first == r && layout[c].second == s) A(i, mOff + static_cast<int>(c)) += 1.0;
      }
    }
    A(a, qCol) = 1.0;
    A(d, 1 + a) = 1.0;
  }
}

Eigen::MatrixXd OperatorAE::symbol(const Eigen::VectorXd& eta) const {
  require(eta.size() == d_ + 1, "frequency must have d + 1 components", "eta");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(rows(), N());
  for (int l = 0; l <= d_; ++l) S += eta(l) * A_[static_cast<std::size_t>(l)];
  return S;
}

Eigen::MatrixXd OperatorAE::contraction(const Eigen::VectorXd& z) const {
  require(z.size() == N(), "state has the wrong dimension", "z");
  Eigen::MatrixXd L(rows(), d_ + 1);
  for (int l = 0; l <= d_; ++l) L.col(l) = A_[static_cast<std::size_t>(l)] * z;
  return L;
}

namespace {

int rank_from_singular_values(const Eigen::VectorXd& s) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > kRankThreshold * s(0)) ++r;
  return r;
}

}  // namespace

Eigen::MatrixXd OperatorAE::kernel(const Eigen::VectorXd& eta) const {
  require(eta.size() == d_ + 1, "frequency must have d + 1 components", "eta");
  require(eta.norm() > 0.0, "kernel needs a nonzero frequency", "eta");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(symbol(eta), Eigen::ComputeFullV);
  const int r = rank_from_singular_values(svd.singularValues());
  return svd.matrixV().rightCols(N() - r);
}

int OperatorAE::rank(const Eigen::VectorXd& eta) const {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(symbol(eta));
  return rank_from_singular_values(svd.singularValues());
}

FrequencySymbol symbol(const OperatorAE& op, const Eigen::VectorXd& eta) { return {eta, op.symbol(eta)}; }

ConstantRankResult constant_rank_check(const OperatorAE& op, long samples, std::uint64_t seed, double scale) {
  require(samples >= 1, "need at least one sample", "samples");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  ConstantRankResult out;
  out.samples = samples;
  out.min_rank = op.rows() + 1;
  out.max_rank = -1;
  Eigen::VectorXd eta(op.d() + 1);
  for (long i = 0; i < samples; ++i) {
    do {
      for (Eigen::Index a = 0; a < eta.size(); ++a) eta(a) = gauss(rng);
    } while (eta.norm() < 1e-12);
    eta *= scale / eta.norm();
    const int r = op.rank(eta);
    out.min_rank = std::min(out.min_rank, r);
    out.max_rank = std::max(out.max_rank, r);
  }
  out.constant = out.min_rank == out.max_rank;
  out.rank = out.max_rank;
  return out;
}

// ---------------------------------------------------------------------------
// Wave cone

namespace {

// Hyperspherical coordinates on S^d with d angles; the last angle is azimuthal.
Eigen::VectorXd sphere_point(const Eigen::VectorXd& angles) {
  const Eigen::Index k = angles.size();
  Eigen::VectorXd x(k + 1);
  double sprod = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    x(i) = sprod * std::cos(angles(i));
    sprod *= std::sin(angles(i));
  }
  x(k) = sprod;
  return x;
}

// Smallest per-angle resolution m with m^angles >= base^(angles + 1).
int sweep_resolution(int base, int angles) {
  const double target = std::pow(static_cast<double>(base), angles + 1);
  int m = base;
  while (std::pow(static_cast<double>(m), angles) < target) ++m;
  return m;
}

struct ConeObjective {
  const Eigen::MatrixXd& L;
  double operator()(const Eigen::VectorXd& angles) const { return (L * sphere_point(angles)).norm(); }
};

Eigen::VectorXd nelder_mead(const ConeObjective& f, Eigen::VectorXd x0, double step, int iterations) {
  const Eigen::Index n = x0.size();
  std::vector<Eigen::VectorXd> simplex{x0};
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd v = x0;
    v(i) += step;
    simplex.push_back(v);
  }
  std::vector<double> values;
  for (const auto& v : simplex) values.push_back(f(v));

  for (int it = 0; it < iterations; ++it) {
    std::vector<std::size_t> order(simplex.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[order.size() - 2];

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < simplex.size(); ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    if (fr < values[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const Eigen::VectorXd contracted = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(contracted);
      if (fc < values[worst]) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i < simplex.size(); ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = f(simplex[i]);
        }
      }
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

}  // namespace

WaveConeReport wave_cone_membership(const OperatorAE& op, const RelaxedState& z, const WaveConeOptions& options) {
  require(z.d() == op.d(), "state dimension does not match the operator", "z");
  const double znorm = z.vector().norm();
  require(znorm > 0.0, "wave-cone membership is undefined for the zero state", "z");
  require(options.sweep_per_angle >= 2, "sweep needs at least two points per angle", "sweep_per_angle");
  require(options.tol >= 0.0, "tolerance must be nonnegative", "tol");

  const Eigen::MatrixXd L = op.contraction(z.vector());
  const Eigen::MatrixXd G = L.transpose() * L;
  const ConeObjective objective{L};
  const int angles = op.d();
  const int m = sweep_resolution(options.sweep_per_angle, angles);

  std::vector<std::vector<double>> cos_table(static_cast<std::size_t>(angles)), sin_table(cos_table.size());
  for (int a = 0; a < angles; ++a)
    for (int i = 0; i < m; ++i) {
      const double t = (a == angles - 1) ? 2.0 * pi * static_cast<double>(i) / m : pi * (static_cast<double>(i) + 0.5) / m;
      cos_table[static_cast<std::size_t>(a)].push_back(std::cos(t));
      sin_table[static_cast<std::size_t>(a)].push_back(std::sin(t));
    }
  long total = 1;
  for (int a = 0; a < angles; ++a) total *= m;
  std::vector<long> idx(static_cast<std::size_t>(angles));
  Eigen::VectorXd point(angles + 1);
  long best_flat = 0;
  double best_sq = std::numeric_limits<double>::infinity();
  for (long flat = 0; flat < total; ++flat) {
    long rest = flat;
    for (int a = angles - 1; a >= 0; --a) {
      idx[static_cast<std::size_t>(a)] = rest % m;
      rest /= m;
    }
    double sprod = 1.0;
    for (int a = 0; a < angles; ++a) {
      const auto i = static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
      point(a) = sprod * cos_table[static_cast<std::size_t>(a)][i];
      sprod *= sin_table[static_cast<std::size_t>(a)][i];
    }
    point(angles) = sprod;
    const double v = point.dot(G * point);
    if (v < best_sq) {
      best_sq = v;
      best_flat = flat;
    }
  }
  Eigen::VectorXd best_theta(angles);
  {
    long rest = best_flat;
    for (int a = angles - 1; a >= 0; --a) {
      const long i = rest % m;
      rest /= m;
      best_theta(a) = (a == angles - 1) ? 2.0 * pi * static_cast<double>(i) / m : pi * (static_cast<double>(i) + 0.5) / m;
    }
  }
  const double best = objective(best_theta);

  WaveConeReport report;
  report.sweep_minimum = best;
  Eigen::VectorXd refined = nelder_mead(objective, best_theta, pi / m, options.refine_steps);
  Eigen::VectorXd eta = sphere_point(objective(refined) < best ? refined : best_theta);
  double value = (L * eta).norm();

  // Inverse iteration towards the smallest right singular vector of L.
  const double shift = 1e-14 * std::max(G.norm(), 1e-300);
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(G + shift * Eigen::MatrixXd::Identity(G.rows(), G.cols()));
  Eigen::VectorXd x = eta;
  for (int it = 0; it < options.polish_steps; ++it) {
    Eigen::VectorXd y = ldlt.solve(x);
    const double nrm = y.norm();
    if (!std::isfinite(nrm) || nrm == 0.0) break;
    x = y / nrm;
    const double vx = (L * x).norm();
    if (vx < value) {
      value = vx;
      eta = x;
    }
  }
  if (eta(0) < 0.0) eta = -eta;

  report.best_direction = eta;
  report.min_singular_value = value;
  report.tolerance = options.tol * znorm;
  report.member = value <= report.tolerance;
  return report;
}

nlohmann::json to_json(const WaveConeReport& r) {
  return {{"member", r.member},
          {"best_direction", std::vector<double>(r.best_direction.data(), r.best_direction.data() + r.best_direction.size())},
          {"min_singular_value", r.min_singular_value},
          {"tolerance", r.tolerance},
          {"sweep_minimum", r.sweep_minimum}};
}

DiatomicDeterminant diatomic_det(const RelaxedState& z1, const RelaxedState& z2) {
  require(z1.d() == 2 && z2.d() == 2, "the determinant factorisation is only available for d = 2", "d");
  require(std::abs(z1.rho() - z2.rho()) <= 1e-12 * std::max(1.0, std::abs(z1.rho())), "rho-slots must agree", "rho");
  static const OperatorAE op(2);
  DiatomicDeterminant out;
  out.contraction = op.contraction((z1 - z2).vector());
  const auto& c = out.contraction;
  out.determinant = c(0, 0) * (c(1, 1) * c(2, 2) - c(1, 2) * c(2, 1)) - c(0, 1) * (c(1, 0) * c(2, 2) - c(1, 2) * c(2, 0)) +
                    c(0, 2) * (c(1, 0) * c(2, 1) - c(1, 1) * c(2, 0));
  const AugmentedState s1 = unlift_S(z1);
  const AugmentedState s2 = unlift_S(z2);
  out.closed_form = -(s1.u - s2.u).squaredNorm() * (s1.P - s2.P);
  return out;
}

// ---------------------------------------------------------------------------
// Negative-norm residual and plane waves

long RelaxedField::spatial_points() const {
  long s = 1;
  for (int a = 0; a < d; ++a) s *= n;
  return s;
}

double ae_residual_negative_norm(const OperatorAE& op, const RelaxedField& field, TimeWindow window,
                                 double window_margin) {
  require(field.d == op.d(), "field dimension does not match the operator", "d");
  require(field.nt >= 8 && field.n >= 8, "residual grid needs at least 8 points per axis", "grid");
  require(field.T > 0.0, "time span must be positive", "T");
  const int N = op.N();
  const long S = field.spatial_points();
  const long P = field.total_points();
  require(static_cast<long>(field.values.size()) == P * N, "field has the wrong size", "values");

  std::vector<int> dims{field.nt};
  for (int a = 0; a < field.d; ++a) dims.push_back(field.n);

  std::vector<double> weights(static_cast<std::size_t>(field.nt), 1.0);
  if (window == TimeWindow::raised_cosine) {
    quad::RaisedCosineWindow w{field.T, window_margin};
    for (int j = 0; j < field.nt; ++j) weights[static_cast<std::size_t>(j)] = w.value(field.T * j / field.nt);
  }

  std::vector<std::vector<spectral::cplx>> zhat(static_cast<std::size_t>(N));
  std::vector<double> comp(static_cast<std::size_t>(P));
  for (int c = 0; c < N; ++c) {
    for (long p = 0; p < P; ++p)
      comp[static_cast<std::size_t>(p)] = weights[static_cast<std::size_t>(p / S)] * field.values[static_cast<std::size_t>(p * N + c)];
    zhat[static_cast<std::size_t>(c)] = spectral::forward_real(dims, comp);
  }

  std::vector<Eigen::MatrixXd> A;
  for (int l = 0; l <= op.d(); ++l) A.push_back(op.coefficient(l));

  double sum = 0.0;
  std::vector<int> idx;
  Eigen::VectorXcd z(N);
  Eigen::VectorXd eta(op.d() + 1);
  for (long p = 1; p < P; ++p) {
    spectral::unravel(p, dims, idx);
    eta(0) = 2.0 * pi * spectral::signed_wavenumber(idx[0], field.nt) / field.T;
    for (int a = 0; a < op.d(); ++a) eta(a + 1) = 2.0 * pi * spectral::signed_wavenumber(idx[static_cast<std::size_t>(a + 1)], field.n);
    const double e2 = eta.squaredNorm();
    for (int c = 0; c < N; ++c) z(c) = zhat[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
    const Eigen::VectorXcd Az = op.symbol(eta).cast<std::complex<double>>() * z;
    sum += Az.squaredNorm() / e2;
  }
  return std::sqrt(field.T * sum);
}

Eigen::VectorXd integer_frequency(const std::vector<int>& k, double T) {
  require(!k.empty(), "empty frequency", "k");
  require(T > 0.0, "time span must be positive", "T");
  Eigen::VectorXd eta(static_cast<Eigen::Index>(k.size()));
  eta(0) = k[0] / T;
  for (std::size_t a = 1; a < k.size(); ++a) eta(static_cast<Eigen::Index>(a)) = k[a];
  return eta;
}

RelaxedField plane_wave_field(const OperatorAE& op, const std::vector<int>& k, const Eigen::VectorXd& amp,
                              const std::function<double(double)>& profile, int nt, int n, double T) {
  require(static_cast<int>(k.size()) == op.d() + 1, "frequency must have d + 1 integer components", "k");
  require(std::any_of(k.begin(), k.end(), [](int v) { return v != 0; }), "frequency must be nonzero", "k");
  require(amp.size() == op.N(), "amplitude has the wrong dimension", "amp");
  require(nt >= 1 && n >= 1, "grid must be nonempty", "grid");
  const Eigen::VectorXd eta = integer_frequency(k, T);
  const double res = (op.symbol(eta / eta.norm()) * amp).norm();
  require(res <= 1e-10 * std::max(1.0, amp.norm()), "amplitude is not in the kernel of the symbol", "amp");

  RelaxedField f;
  f.d = op.d();
  f.nt = nt;
  f.n = n;
  f.T = T;
  const int N = op.N();
  const long S = f.spatial_points();
  f.values.resize(static_cast<std::size_t>(S * nt * N));
  for (int j = 0; j < nt; ++j) {
    const double t = T * j / nt;
    for (long s = 0; s < S; ++s) {
      double phase = k[0] * t / T;
      long rest = s;
      for (int a = f.d - 1; a >= 0; --a) {
        const double x = (static_cast<double>(rest % n) + 0.5) / n;
        rest /= n;
        phase += k[static_cast<std::size_t>(a + 1)] * x;
      }
      const double v = profile(phase);
      const std::size_t base = static_cast<std::size_t>((j * S + s) * N);
      for (int c = 0; c < N; ++c) f.values[base + static_cast<std::size_t>(c)] = amp(c) * v;
    }
  }
  return f;
}

}  // namespace lowmach

#include "lowmach/jensen.hpp"

#include "lowmach/error.hpp"
#include "lowmach/parallel.hpp"
#include "lowmach/quadrature.hpp"
#include "lowmach/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <set>

namespace lowmach::jensen {

using std::numbers::pi;

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<double> vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

// ---------------------------------------------------------------------------
// Di-atomic criterion

DiatomicCell diatomic_cell(const young::AtomicMeasure& cell, double tol) {
  require(cell.size() == 2, "di-atomic test needs exactly two atoms per cell", "mu");
  require(cell.dim() == relaxed_dim(2), "di-atomic test is only defined for d = 2", "d");
  const auto& a = cell.atoms();
  for (const auto& atom : a)
    require(std::abs(atom.point(0) - 1.0) <= 1e-12, "atoms must be lift_S images (rho-slot 1)", "mu");
  const RelaxedState z1(2, a[0].point);
  const RelaxedState z2(2, a[1].point);
  // lift_S images satisfy M = m (.) m; anything else is not a lifted state.
  for (const auto* z : {&z1, &z2}) {
    const Eigen::MatrixXd expect = ocircle(z->m(), 2).matrix();
    require((z->M().matrix() - expect).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, expect.norm()),
            "atoms must be lift_S images (M = m (.) m)", "mu");
  }
  const AugmentedState s1 = unlift_S(z1);
  const AugmentedState s2 = unlift_S(z2);
  DiatomicCell out;
  out.du = (s1.u - s2.u).norm();
  out.dP = std::abs(s1.P - s2.P);
  out.determinant = diatomic_det(z1, z2).determinant;
  out.status = (out.du > tol && out.dP > tol) ? DiatomicStatus::violated : DiatomicStatus::wave_cone_connected;
  return out;
}

DiatomicReport diatomic_jensen_test(const young::YoungMeasure& lifted, double tol) {
  DiatomicReport r;
  r.cells.reserve(lifted.cells().size());
  const auto& grid = lifted.grid();
  const auto tw = quad::trapezoid_weights(grid.times, grid.T);
  double total = 0.0;
  double bad = 0.0;
  const long S = grid.cells_per_slice();
  for (std::size_t i = 0; i < lifted.cells().size(); ++i) {
    r.cells.push_back(diatomic_cell(lifted.cells()[i], tol));
    const double w = tw[i / static_cast<std::size_t>(S)] * grid.cell_volume();
    total += w;
    if (r.cells.back().status == DiatomicStatus::violated) {
      ++r.violated_cells;
      bad += w;
    }
  }
  r.violated_fraction = total > 0.0 ? bad / total : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Candidate directions

std::vector<SplitDirection> candidate_directions(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z,
                                                 double fd_step, int random_frequencies, std::uint64_t seed) {
  require(z.size() == op.N(), "state has the wrong dimension", "z");
  require(fd_step > 0.0, "finite-difference step must be positive", "fd_step");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> entry(-2, 2);
  std::normal_distribution<double> gauss;

  std::vector<std::vector<int>> freqs;
  std::set<std::vector<int>> seen;
  for (int l = 0; l <= op.d(); ++l) {
    std::vector<int> k(static_cast<std::size_t>(op.d() + 1), 0);
    k[static_cast<std::size_t>(l)] = 1;
    freqs.push_back(k);
    seen.insert(k);
  }
  for (int r = 0, guard = 0; r < random_frequencies && guard < 100 * (random_frequencies + 1); ++guard) {
    std::vector<int> k(static_cast<std::size_t>(op.d() + 1));
    for (auto& v : k) v = entry(rng);
    if (std::all_of(k.begin(), k.end(), [](int v) { return v == 0; })) continue;
    std::vector<int> neg(k.size());
    std::transform(k.begin(), k.end(), neg.begin(), [](int v) { return -v; });
    if (seen.count(k) || seen.count(neg)) continue;
    seen.insert(k);
    freqs.push_back(k);
    ++r;
  }

  const double f0 = f(z);
  std::vector<SplitDirection> out;
  for (const auto& k : freqs) {
    Eigen::VectorXd eta(static_cast<Eigen::Index>(k.size()));
    for (std::size_t a = 0; a < k.size(); ++a) eta(static_cast<Eigen::Index>(a)) = k[a];
    const Eigen::MatrixXd K = op.kernel(eta);
    const Eigen::Index m = K.cols();
    Eigen::MatrixXd H(m, m);
    const double s = fd_step;
    for (Eigen::Index i = 0; i < m; ++i) {
      H(i, i) = (f(z + s * K.col(i)) - 2.0 * f0 + f(z - s * K.col(i))) / (s * s);
      for (Eigen::Index j = i + 1; j < m; ++j) {
        const Eigen::VectorXd a = K.col(i) + K.col(j);
        const Eigen::VectorXd b = K.col(i) - K.col(j);
        H(i, j) = H(j, i) = (f(z + s * a) - f(z + s * b) - f(z - s * b) + f(z - s * a)) / (4.0 * s * s);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
    Eigen::VectorXd v = K * eig.eigenvectors().col(0);
    out.push_back({v / v.norm(), k});

    Eigen::VectorXd g(m);
    for (Eigen::Index i = 0; i < m; ++i) g(i) = gauss(rng);
    Eigen::VectorXd w = K * g;
    if (w.norm() > 0.0) out.push_back({w / w.norm(), k});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Laminates

std::vector<young::Atom> Laminate::leaves() const {
  std::vector<young::Atom> out;
  for (const auto& n : nodes)
    if (n.plus < 0) out.push_back({n.weight, n.point});
  return out;
}

int Laminate::depth() const {
  if (nodes.empty()) return 0;
  std::function<int(int)> rec = [&](int i) -> int {
    const auto& n = nodes[static_cast<std::size_t>(i)];
    if (n.plus < 0) return 0;
    return 1 + std::max(rec(n.plus), rec(n.minus));
  };
  return rec(0);
}

namespace {

constexpr int kExactLevels = 2;
constexpr int kExactLevelsDeep = 1;  // depth >= 3: exhaustive root split only

class LaminateSearch {
 public:
  struct Split {
    int dir = -1;
    double lambda = 0.5;
    double step = 0.0;
  };
  struct Result {
    double value;
    Split split;
  };

  LaminateSearch(const Fn& f, const std::vector<SplitDirection>& dirs, Eigen::VectorXd root, double q,
                 std::vector<double> steps, std::vector<double> lambdas, int exact_levels)
      : f_(f),
        dirs_(dirs),
        root_(std::move(root)),
        q_(q),
        steps_(std::move(steps)),
        lambdas_(std::move(lambdas)),
        exact_levels_(exact_levels) {}

  Result solve(const Eigen::VectorXd& p, int level, int remaining) const {
    Result best{f_(p), {}};
    if (remaining == 0) return best;
    if (level < exact_levels_) {
      for_each_split(p, [&](const Split& sp, const Eigen::VectorXd& plus, const Eigen::VectorXd& minus) {
        const double v = sp.lambda * solve(plus, level + 1, remaining - 1).value +
                         (1.0 - sp.lambda) * solve(minus, level + 1, remaining - 1).value;
        if (v < best.value) best = {v, sp};
      });
      return best;
    }
    // greedy below the exact levels
    Split choice;
    double one_level = best.value;
    for_each_split(p, [&](const Split& sp, const Eigen::VectorXd& plus, const Eigen::VectorXd& minus) {
      const double v = sp.lambda * f_(plus) + (1.0 - sp.lambda) * f_(minus);
      if (v < one_level) {
        one_level = v;
        choice = sp;
      }
    });
    if (choice.dir < 0) return best;
    Eigen::VectorXd plus, minus;
    children(p, choice, plus, minus);
    const double v = choice.lambda * solve(plus, level + 1, remaining - 1).value +
                     (1.0 - choice.lambda) * solve(minus, level + 1, remaining - 1).value;
    return v < best.value ? Result{v, choice} : best;
  }

  int build(Laminate& lam, const Eigen::VectorXd& p, double weight, int level, int remaining) const {
    const int idx = static_cast<int>(lam.nodes.size());
    lam.nodes.push_back({});
    lam.nodes.back().weight = weight;
    lam.nodes.back().point = p;
    const Result r = solve(p, level, remaining);
    if (r.split.dir < 0) return idx;
    Eigen::VectorXd plus, minus;
    children(p, r.split, plus, minus);
    const int a = build(lam, plus, weight * r.split.lambda, level + 1, remaining - 1);
    const int b = build(lam, minus, weight * (1.0 - r.split.lambda), level + 1, remaining - 1);
    auto& node = lam.nodes[static_cast<std::size_t>(idx)];
    node.plus = a;
    node.minus = b;
    node.lambda = r.split.lambda;
    node.step = r.split.step;
    node.v = dirs_[static_cast<std::size_t>(r.split.dir)].v;
    node.frequency = dirs_[static_cast<std::size_t>(r.split.dir)].frequency;
    return idx;
  }

 private:
  void children(const Eigen::VectorXd& p, const Split& sp, Eigen::VectorXd& plus, Eigen::VectorXd& minus) const {
    const Eigen::VectorXd& v = dirs_[static_cast<std::size_t>(sp.dir)].v;
    plus = p + sp.step * v;
    minus = p - (sp.lambda / (1.0 - sp.lambda)) * sp.step * v;
  }

  bool feasible(const Eigen::VectorXd& x) const { return (x - root_).norm() <= q_ * (1.0 + 1e-12); }

  template <class Visit>
  void for_each_split(const Eigen::VectorXd& p, Visit&& visit) const {
    Eigen::VectorXd plus, minus;
    for (std::size_t d = 0; d < dirs_.size(); ++d)
      for (double lambda : lambdas_)
        for (double step : steps_) {
          const Split sp{static_cast<int>(d), lambda, step};
          children(p, sp, plus, minus);
          if (!feasible(plus) || !feasible(minus)) continue;
          visit(sp, plus, minus);
        }
  }

  const Fn& f_;
  const std::vector<SplitDirection>& dirs_;
  Eigen::VectorXd root_;
  double q_;
  std::vector<double> steps_;
  std::vector<double> lambdas_;
  int exact_levels_;
};

double lattice_spacing(double q, double h) { return h > 0.0 ? h : q / 16.0; }

int lattice_count(double q, double h) { return static_cast<int>(std::floor(q / h + 1e-9)); }

}  // namespace

EnvelopeEstimate envelope_upper_laminate(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z,
                                         const LaminateOptions& options) {
  require(options.depth >= 1, "laminate depth must be at least 1", "depth");
  require(options.q >= 0.0, "truncation radius must be nonnegative", "q");
  require(z.size() == op.N(), "state has the wrong dimension", "z");
  for (double l : options.lambdas) require(l > 0.0 && l < 1.0, "split weights must lie in (0, 1)", "lambdas");

  EnvelopeEstimate est;
  est.method = "laminate";
  est.z = z;
  est.q_used = options.q;
  est.f_at_z = f(z);

  if (options.q == 0.0) {
    est.value = est.f_at_z;
    Laminate::Node root;
    root.point = z;
    est.laminate.nodes.push_back(root);
    return est;
  }
  const double h = lattice_spacing(options.q, options.h);
  require(h > 0.0, "lattice spacing must be positive", "h");
  const auto dirs = candidate_directions(op, f, z, 8.0 * h, options.trials, options.seed);
  std::vector<double> steps;
  const int J = lattice_count(options.q, h);
  for (int j = 1; j <= J; ++j) {
    steps.push_back(j * h);
    steps.push_back(-j * h);
  }
  const int exact = options.depth <= kExactLevels ? kExactLevels : kExactLevelsDeep;
  const LaminateSearch search(f, dirs, z, options.q, steps, options.lambdas, exact);
  search.build(est.laminate, z, 1.0, 0, options.depth);
  est.value = 0.0;
  for (const auto& leaf : est.laminate.leaves()) est.value += leaf.weight * f(leaf.point);
  est.value = std::min(est.value, est.f_at_z);
  if (options.depth > kExactLevels) {
    LaminateOptions shallower = options;
    --shallower.depth;
    EnvelopeEstimate prev = envelope_upper_laminate(op, f, z, shallower);
    if (prev.value < est.value) return prev;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Plane waves

double planewave_profile(double s, double beta) {
  const double x = std::sin(2.0 * pi * s);
  if (beta <= 0.0) return x;
  if (std::isinf(beta)) return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0);
  return std::tanh(beta * x) / std::tanh(beta);
}

namespace {

std::vector<double> profile_betas(int quad_points) {
  std::vector<double> betas{0.0};
  const double bmax = quad_points / 16.0;
  for (double b = 1.0; b <= bmax + 1e-12; b *= 2.0) betas.push_back(b);
  // square-wave limit, integrated exactly by an even midpoint rule
  if (quad_points % 2 == 0) betas.push_back(std::numeric_limits<double>::infinity());
  return betas;
}

bool independent(const std::vector<int>& a, const std::vector<int>& b) {
  // not parallel as integer vectors
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      if (a[i] * b[j] - a[j] * b[i] != 0) return true;
  return false;
}

}  // namespace

EnvelopeEstimate envelope_upper_planewave(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z,
                                          const PlaneWaveOptions& options) {
  require(options.modes == 1 || options.modes == 2, "plane-wave search supports 1 or 2 modes", "modes");
  require(options.q >= 0.0, "truncation radius must be nonnegative", "q");
  require(options.quad_points >= 4, "need at least 4 quadrature points", "quad_points");
  require(z.size() == op.N(), "state has the wrong dimension", "z");

  EnvelopeEstimate est;
  est.method = "planewave";
  est.z = z;
  est.q_used = options.q;
  est.f_at_z = f(z);
  est.value = est.f_at_z;
  est.planewave.quad_points = options.quad_points;
  if (options.q == 0.0) return est;

  const double h = lattice_spacing(options.q, options.h);
  require(h > 0.0, "lattice spacing must be positive", "h");
  const int J = lattice_count(options.q, h);
  const auto dirs = candidate_directions(op, f, z, 8.0 * h, options.trials, options.seed);
  const int M = options.quad_points;
  const auto betas = profile_betas(M);

  std::vector<std::vector<double>> psi(betas.size(), std::vector<double>(static_cast<std::size_t>(M)));
  for (std::size_t b = 0; b < betas.size(); ++b)
    for (int i = 0; i < M; ++i) psi[b][static_cast<std::size_t>(i)] = planewave_profile((i + 0.5) / M, betas[b]);

  Eigen::VectorXd x(z.size());
  if (options.modes == 1) {
    for (const auto& dir : dirs)
      for (std::size_t b = 0; b < betas.size(); ++b)
        for (int j = 1; j <= J; ++j) {
          const double c = j * h;
          double sum = 0.0;
          for (int i = 0; i < M; ++i) sum += f(z + (c * psi[b][static_cast<std::size_t>(i)]) * dir.v);
          const double v = sum / M;
          if (v < est.value) {
            est.value = v;
            est.planewave.directions = {dir};
            est.planewave.coefficients = {c};
            est.planewave.beta = betas[b];
          }
        }
    return est;
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < dirs.size(); ++a)
    for (std::size_t b = a + 1; b < dirs.size(); ++b)
      if (independent(dirs[a].frequency, dirs[b].frequency)) pairs.emplace_back(a, b);
  std::mt19937_64 rng(mix_seed(options.seed, 17));
  std::shuffle(pairs.begin(), pairs.end(), rng);
  const std::size_t budget = static_cast<std::size_t>(std::max(1, 4 * options.trials));
  if (pairs.size() > budget) pairs.resize(budget);

  for (const auto& [ia, ib] : pairs) {
    const auto& va = dirs[ia].v;
    const auto& vb = dirs[ib].v;
    for (std::size_t b = 0; b < betas.size(); ++b)
      for (int j1 = 0; j1 <= J; ++j1)
        for (int j2 = -(J - j1); j2 <= J - j1; ++j2) {
          if (j1 == 0 && j2 <= 0) continue;
          const double c1 = j1 * h;
          const double c2 = j2 * h;
          double sum = 0.0;
          for (int i1 = 0; i1 < M; ++i1) {
            const Eigen::VectorXd base = z + (c1 * psi[b][static_cast<std::size_t>(i1)]) * va;
            for (int i2 = 0; i2 < M; ++i2) sum += f(base + (c2 * psi[b][static_cast<std::size_t>(i2)]) * vb);
          }
          const double v = sum / (static_cast<double>(M) * M);
          if (v < est.value) {
            est.value = v;
            est.planewave.directions = {dirs[ia], dirs[ib]};
            est.planewave.coefficients = {c1, c2};
            est.planewave.beta = betas[b];
          }
        }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Certificates

namespace {

int step_quadrature_points(double lambda) {
  for (int M : {16, 240})
    if (std::abs(lambda * M - std::round(lambda * M)) < 1e-9) return M;
  return 240;
}

double walk_laminate(const Laminate& lam, int idx, const Eigen::VectorXd& pos, const Fn& f) {
  const auto& node = lam.nodes[static_cast<std::size_t>(idx)];
  if (node.plus < 0) return f(pos);
  // step profile: +step on [0, lambda), -lambda/(1-lambda) step on [lambda, 1)
  const int M = step_quadrature_points(node.lambda);
  int count_plus = 0;
  for (int i = 0; i < M; ++i)
    if ((i + 0.5) / M < node.lambda) ++count_plus;
  const Eigen::VectorXd up = pos + node.step * node.v;
  const Eigen::VectorXd down = pos - (node.lambda / (1.0 - node.lambda)) * node.step * node.v;
  return (count_plus * walk_laminate(lam, node.plus, up, f) + (M - count_plus) * walk_laminate(lam, node.minus, down, f)) / M;
}

}  // namespace

double reevaluate(const EnvelopeEstimate& e, const Fn& f) {
  if (e.method == "laminate") {
    require(!e.laminate.nodes.empty(), "laminate certificate is empty", "certificate");
    return walk_laminate(e.laminate, 0, e.z, f);
  }
  require(e.method == "planewave", "unknown certificate kind", "method");
  const auto& pw = e.planewave;
  if (pw.coefficients.empty()) return f(e.z);
  const int M = std::isinf(pw.beta) ? 2 * pw.quad_points : 2 * pw.quad_points + 1;
  std::vector<double> psi(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) psi[static_cast<std::size_t>(i)] = planewave_profile((i + 0.25) / M, pw.beta);
  if (pw.coefficients.size() == 1) {
    double sum = 0.0;
    for (int i = 0; i < M; ++i) sum += f(e.z + pw.coefficients[0] * psi[static_cast<std::size_t>(i)] * pw.directions[0].v);
    return sum / M;
  }
  double sum = 0.0;
  for (int i1 = 0; i1 < M; ++i1)
    for (int i2 = 0; i2 < M; ++i2)
      sum += f(e.z + pw.coefficients[0] * psi[static_cast<std::size_t>(i1)] * pw.directions[0].v +
               pw.coefficients[1] * psi[static_cast<std::size_t>(i2)] * pw.directions[1].v);
  return sum / (static_cast<double>(M) * M);
}

nlohmann::json to_json(const EnvelopeEstimate& e) {
  nlohmann::json cert;
  if (e.method == "laminate") {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : e.laminate.nodes) {
      nlohmann::json j = {{"weight", n.weight}, {"point", vec(n.point)}};
      if (n.plus >= 0) {
        j["plus"] = n.plus;
        j["minus"] = n.minus;
        j["lambda"] = n.lambda;
        j["step"] = n.step;
        j["direction"] = vec(n.v);
        j["frequency"] = n.frequency;
      }
      nodes.push_back(j);
    }
    cert = {{"nodes", nodes}};
  } else {
    nlohmann::json modes = nlohmann::json::array();
    for (std::size_t i = 0; i < e.planewave.coefficients.size(); ++i)
      modes.push_back({{"coefficient", e.planewave.coefficients[i]},
                       {"direction", vec(e.planewave.directions[i].v)},
                       {"frequency", e.planewave.directions[i].frequency}});
    const double beta = e.planewave.beta;
    cert = {{"modes", modes},
            {"profile", beta <= 0.0 ? "sine" : (std::isinf(beta) ? "square" : "tanh")},
            {"beta", std::isinf(beta) ? nlohmann::json() : nlohmann::json(beta)},
            {"quad_points", e.planewave.quad_points}};
  }
  return {{"value", e.value}, {"f_at_z", e.f_at_z}, {"q_used", e.q_used}, {"bound_kind", e.bound_kind},
          {"method", e.method}, {"z", vec(e.z)},   {"certificate", cert}};
}

// ---------------------------------------------------------------------------
// Segment convexity

double lower_hull_value(const std::vector<double>& s, const std::vector<double>& g, double at) {
  require(s.size() == g.size() && s.size() >= 2, "hull needs at least two nodes", "samples");
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (s[b] - s[a]) * (g[i] - g[a]) - (g[b] - g[a]) * (s[i] - s[a]);
      if (cross <= 0.0)
        hull.pop_back();
      else
        break;
    }
    hull.push_back(i);
  }
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    const std::size_t a = hull[k];
    const std::size_t b = hull[k + 1];
    if (at >= s[a] && at <= s[b]) {
      const double t = (at - s[a]) / (s[b] - s[a]);
      return (1.0 - t) * g[a] + t * g[b];
    }
  }
  return at <= s.front() ? g.front() : g.back();
}

SegmentJensenResult segment_convexity_jensen(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z1,
                                             const Eigen::VectorXd& z2, double lambda, int samples) {
  require(samples >= 2, "need at least two samples", "samples");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]", "lambda");
  const Eigen::VectorXd dz = z1 - z2;
  if (dz.norm() > 0.0) {
    const auto wc = wave_cone_membership(op, RelaxedState(op.d(), dz));
    require(wc.member, "states are not wave-cone connected", "z1");
  }
  std::vector<double> s(static_cast<std::size_t>(samples));
  std::vector<double> g(static_cast<std::size_t>(samples));
  double scale = 0.0;
  for (int i = 0; i < samples; ++i) {
    s[static_cast<std::size_t>(i)] = static_cast<double>(i) / (samples - 1);
    g[static_cast<std::size_t>(i)] = f((1.0 - s[static_cast<std::size_t>(i)]) * z1 + s[static_cast<std::size_t>(i)] * z2);
    scale = std::max(scale, std::abs(g[static_cast<std::size_t>(i)]));
  }
  SegmentJensenResult r;
  // lambda z1 + (1 - lambda) z2 sits at s = 1 - lambda
  r.hull = lower_hull_value(s, g, 1.0 - lambda);
  r.combination = lambda * f(z1) + (1.0 - lambda) * f(z2);
  r.holds = r.combination >= r.hull - 1e-8 * std::max(1.0, scale);
  return r;
}

// ---------------------------------------------------------------------------
// Reports

std::string to_string(CellStatus s) {
  switch (s) {
    case CellStatus::violated:
      return "violated";
    case CellStatus::satisfied_certified:
      return "satisfied_certified";
    case CellStatus::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

young::TestDictionary default_dictionary(int d, const Eigen::VectorXd& c, double p0) {
  require(d >= 2, "dictionary needs d >= 2", "d");
  require(c.size() == d, "reference velocity has the wrong dimension", "c");
  const int N = relaxed_dim(d);
  young::TestDictionary dict;
  for (int i = 0; i < N; ++i)
    dict.entries.push_back({"z" + std::to_string(i), N, [i](const Eigen::VectorXd& z) { return z(i); }, 0.0, 0.0});
  for (int i = 0; i < N; ++i)
    for (int j = i; j < N; ++j)
      dict.entries.push_back({"z" + std::to_string(i) + "*z" + std::to_string(j), N,
                              [i, j](const Eigen::VectorXd& z) { return z(i) * z(j); }, 0.0, 0.0});
  dict.entries.push_back({"|z|^2", N, [](const Eigen::VectorXd& z) { return z.squaredNorm(); }, 0.0, 0.0});
  dict.entries.push_back({"-|u-c|^2(P-p0)", N,
                          [d, c, p0](const Eigen::VectorXd& z) {
                            const Eigen::VectorXd m = z.segment(1, d);
                            const double P = z(z.size() - 1) - m.squaredNorm() / d;
                            return -(m - c).squaredNorm() * (P - p0);
                          },
                          0.0, 0.0});
  return dict;
}

JensenReport jensen_report(const young::YoungMeasure& mu, const young::TestDictionary& dict,
                           const JensenReportOptions& options) {
  require(!dict.entries.empty(), "Jensen report needs a nonempty dictionary", "dict");
  require(options.time_stride >= 1, "time stride must be positive", "time_stride");
  const int d = mu.dim() - 1;
  require(d >= 2, "Jensen report expects a measure over (u, P)", "mu");
  const int N = relaxed_dim(d);
  for (const auto& f : dict.entries)
    require(f.dim < 0 || f.dim == N, "dictionary entry '" + f.name + "' has the wrong dimension", "dict");
  const OperatorAE op(d);
  const auto& grid = mu.grid();
  const long S = grid.cells_per_slice();

  std::vector<long> selected;
  for (long t = 0; t < static_cast<long>(grid.times.size()); t += options.time_stride)
    for (long s = 0; s < S; ++s) selected.push_back(t * S + s);

  const young::Map lift = [d](const Eigen::VectorXd& x) {
    return Eigen::VectorXd(lift_S({x.head(d), x(d)}).vector());
  };

  JensenReport report;
  report.cells.resize(selected.size());
  parallel_for(static_cast<long>(selected.size()), [&](long k) {
    const long flat = selected[static_cast<std::size_t>(k)];
    JensenCellStatus st;
    st.t = flat / S;
    st.s = flat % S;
    const young::AtomicMeasure cell = young::pushforward(mu.cells()[static_cast<std::size_t>(flat)], lift);
    if (cell.size() == 1) {
      st.status = CellStatus::satisfied_certified;
      st.branch = "atomic";
    } else if (cell.size() == 2 && d == 2) {
      const DiatomicCell dc = diatomic_cell(cell, options.diatomic_tol);
      st.branch = "diatomic";
      st.status = dc.status == DiatomicStatus::violated ? CellStatus::violated : CellStatus::satisfied_certified;
      st.witness = "determinant";
      st.gap = dc.determinant;
    } else {
      st.branch = "estimator";
      const Eigen::VectorXd bary = cell.barycenter();
      const double q = options.q > 0.0 ? options.q : 8.0 * cell.support_radius();
      st.status = CellStatus::satisfied_certified;
      double worst = std::numeric_limits<double>::infinity();
      for (std::size_t fi = 0; fi < dict.entries.size(); ++fi) {
        const auto& f = dict.entries[fi];
        const double paired = young::pair(cell, f.eval);
        const double fz = f.eval(bary);
        const double slack = 1e-12 * std::max({1.0, std::abs(paired), std::abs(fz)});
        double gap = paired - fz;
        if (gap < -slack) {
          const std::uint64_t seed = mix_seed(options.seed, static_cast<std::uint64_t>(flat) * 1009u + fi);
          LaminateOptions lo;
          lo.depth = options.laminate_depth;
          lo.q = q;
          lo.trials = options.trials;
          lo.seed = seed;
          double U = envelope_upper_laminate(op, f.eval, bary, lo).value;
          if (paired < U - slack) {
            PlaneWaveOptions po;
            po.modes = options.planewave_modes;
            po.q = q;
            po.quad_points = options.quad_points;
            po.trials = options.trials;
            po.seed = seed;
            U = std::min(U, envelope_upper_planewave(op, f.eval, bary, po).value);
          }
          gap = paired - U;
        }
        if (gap < worst) {
          worst = gap;
          st.witness = f.name;
          st.gap = gap;
        }
        if (gap < -slack) st.status = CellStatus::inconclusive;
      }
    }
    report.cells[static_cast<std::size_t>(k)] = st;
  });

  const auto tw = quad::trapezoid_weights(grid.times, grid.T);
  double total = 0.0;
  double bad = 0.0;
  for (const auto& c : report.cells) {
    const double w = tw[static_cast<std::size_t>(c.t)];
    total += w;
    switch (c.status) {
      case CellStatus::violated:
        ++report.violated;
        bad += w;
        break;
      case CellStatus::satisfied_certified:
        ++report.certified;
        break;
      case CellStatus::inconclusive:
        ++report.inconclusive;
        break;
    }
  }
  report.violated_fraction = total > 0.0 ? bad / total : 0.0;
  return report;
}

nlohmann::json to_json(const JensenReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : r.cells)
    cells.push_back({{"t", c.t}, {"s", c.s}, {"status", to_string(c.status)}, {"branch", c.branch},
                     {"witness", c.witness}, {"gap", c.gap}});
  return {{"violated", r.violated},
          {"satisfied_certified", r.certified},
          {"inconclusive", r.inconclusive},
          {"violated_fraction", r.violated_fraction},
          {"cells", cells}};
}

}  // namespace lowmach::jensen

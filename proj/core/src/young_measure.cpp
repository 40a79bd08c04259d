#include "lowmach/young_measure.hpp"

#include "lowmach/error.hpp"
#include "lowmach/quadrature.hpp"
#include "lowmach/spectral.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace lowmach::young {

using std::numbers::pi;

// ---------------------------------------------------------------------------
// AtomicMeasure

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms, double merge_tol) {
  require(!atoms.empty(), "atomic measure needs at least one atom", "atoms");
  dim_ = static_cast<int>(atoms.front().point.size());
  double total = 0.0;
  for (const auto& a : atoms) {
    require(a.point.size() == dim_, "atoms must share one dimension", "atoms");
    require(std::isfinite(a.weight) && a.weight > 0.0, "atom weights must be positive", "weight");
    require(a.point.allFinite(), "atom points must be finite", "point");
    total += a.weight;
  }
  require(std::abs(total - 1.0) <= 1e-12, "atom weights must sum to 1", "weight");

  atoms_.reserve(atoms.size());
  for (auto& a : atoms) {
    bool merged = false;
    for (auto& kept : atoms_) {
      if ((kept.point - a.point).cwiseAbs().maxCoeff() <= merge_tol) {
        kept.weight += a.weight;
        merged = true;
        break;
      }
    }
    if (!merged) atoms_.push_back(std::move(a));
  }
}

AtomicMeasure AtomicMeasure::dirac(const Eigen::VectorXd& point) { return AtomicMeasure({Atom{1.0, point}}); }

AtomicMeasure AtomicMeasure::uniform(const std::vector<Eigen::VectorXd>& points) {
  require(!points.empty(), "uniform measure needs points", "points");
  const double w = 1.0 / static_cast<double>(points.size());
  std::vector<Atom> atoms;
  atoms.reserve(points.size());
  for (const auto& p : points) atoms.push_back({w, p});
  return AtomicMeasure(std::move(atoms));
}

Eigen::VectorXd AtomicMeasure::barycenter() const {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim_);
  for (const auto& a : atoms_) b += a.weight * a.point;
  return b;
}

double AtomicMeasure::support_radius() const {
  double r = 0.0;
  for (const auto& a : atoms_) r = std::max(r, a.point.norm());
  return r;
}

double pair(const AtomicMeasure& nu, const std::function<double(const Eigen::VectorXd&)>& f) {
  double s = 0.0;
  for (const auto& a : nu.atoms()) s += a.weight * f(a.point);
  return s;
}

double pair(const AtomicMeasure& nu, const TestFunction& f) {
  if (f.dim >= 0)
    require(f.dim == nu.dim(), "test function '" + f.name + "' expects dimension " + std::to_string(f.dim), "f");
  return pair(nu, f.eval);
}

AtomicMeasure pushforward(const AtomicMeasure& nu, const Map& g) {
  std::vector<Atom> moved;
  moved.reserve(nu.size());
  for (const auto& a : nu.atoms()) moved.push_back({a.weight, g(a.point)});
  return AtomicMeasure(std::move(moved));
}

// ---------------------------------------------------------------------------
// Grid and measure

long SpacetimeGrid::cells_per_slice() const {
  long c = 1;
  for (int a = 0; a < d; ++a) c *= n;
  return c;
}

Eigen::VectorXd SpacetimeGrid::cell_center(long s) const {
  Eigen::VectorXd x(d);
  for (int a = d - 1; a >= 0; --a) {
    x(a) = (static_cast<double>(s % n) + 0.5) / n;
    s /= n;
  }
  return x;
}

double SpacetimeGrid::cell_volume() const { return 1.0 / static_cast<double>(cells_per_slice()); }

void SpacetimeGrid::validate() const {
  require(d >= 1, "grid dimension must be positive", "d");
  require(n >= 1, "grid needs at least one cell per axis", "n");
  require(T > 0.0, "grid final time must be positive", "T");
  require(!times.empty(), "grid needs at least one time node", "times");
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "time nodes must be strictly increasing", "times");
}

bool SpacetimeGrid::same_layout(const SpacetimeGrid& other) const {
  if (d != other.d || n != other.n || times.size() != other.times.size()) return false;
  if (std::abs(T - other.T) > 1e-12 * T) return false;
  for (std::size_t i = 0; i < times.size(); ++i)
    if (std::abs(times[i] - other.times[i]) > 1e-12 * T) return false;
  return true;
}

YoungMeasure::YoungMeasure(SpacetimeGrid grid, int m, std::vector<AtomicMeasure> cells)
    : grid_(std::move(grid)), m_(m), cells_(std::move(cells)) {
  grid_.validate();
  require(static_cast<long>(cells_.size()) == grid_.total_cells(), "cell count does not match grid", "cells");
  for (const auto& c : cells_) require(c.dim() == m_, "every cell must have the declared state dimension", "cells");
}

std::vector<double> YoungMeasure::pairing_field(const std::function<double(const Eigen::VectorXd&)>& f) const {
  std::vector<double> out(cells_.size());
  for (std::size_t i = 0; i < cells_.size(); ++i) out[i] = pair(cells_[i], f);
  return out;
}

YoungMeasure pushforward(const YoungMeasure& mu, const Map& g, int image_dim) {
  std::vector<AtomicMeasure> cells;
  cells.reserve(mu.cells().size());
  for (const auto& c : mu.cells()) cells.push_back(pushforward(c, g));
  return YoungMeasure(mu.grid(), image_dim, std::move(cells));
}

YoungMeasure project_u(const YoungMeasure& mu) {
  require(mu.dim() >= 2, "projection needs an (u, P) measure", "mu");
  const int du = mu.dim() - 1;
  return pushforward(mu, [du](const Eigen::VectorXd& z) { return Eigen::VectorXd(z.head(du)); }, du);
}

YoungMeasure extend_with_pressure(const YoungMeasure& nu, const std::vector<double>& pressure) {
  require(pressure.size() == nu.cells().size(), "pressure field must have one value per cell", "pressure");
  std::vector<AtomicMeasure> cells;
  cells.reserve(nu.cells().size());
  const int m = nu.dim();
  for (std::size_t i = 0; i < nu.cells().size(); ++i) {
    std::vector<Atom> atoms;
    for (const auto& a : nu.cells()[i].atoms()) {
      Eigen::VectorXd z(m + 1);
      z.head(m) = a.point;
      z(m) = pressure[i];
      atoms.push_back({a.weight, std::move(z)});
    }
    cells.emplace_back(std::move(atoms));
  }
  return YoungMeasure(nu.grid(), m + 1, std::move(cells));
}

// ---------------------------------------------------------------------------
// Spectral pressure

namespace {

std::vector<int> cube_dims(int n, int d) { return std::vector<int>(static_cast<std::size_t>(d), n); }

// First-derivative wavenumber: the Nyquist mode has no odd derivative.
double first_wavenumber(int index, int n) {
  if (n % 2 == 0 && index == n / 2) return 0.0;
  return 2.0 * pi * spectral::signed_wavenumber(index, n);
}

double second_wavenumber_sq(int index, int n) {
  const double k = 2.0 * pi * spectral::signed_wavenumber(index, n);
  return k * k;
}

// Fourier symbol of -div div applied to a full matrix field; returns coefficients.
std::vector<spectral::cplx> div_div_coefficients(int n, int d, const std::vector<double>& S) {
  const long points = static_cast<long>(std::pow(n, d));
  require(n >= 2, "periodic grid needs n >= 2", "n");
  require(static_cast<long>(S.size()) == points * d * d, "second-moment field has wrong size", "second_moment");
  const auto dims = cube_dims(n, d);
  std::vector<std::vector<spectral::cplx>> Shat(static_cast<std::size_t>(d * d));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      std::vector<double> comp(static_cast<std::size_t>(points));
      for (long p = 0; p < points; ++p)
        comp[static_cast<std::size_t>(p)] = 0.5 * (S[static_cast<std::size_t>(p * d * d + i * d + j)] +
                                                   S[static_cast<std::size_t>(p * d * d + j * d + i)]);
      Shat[static_cast<std::size_t>(i * d + j)] = spectral::forward_real(dims, comp);
    }
  std::vector<spectral::cplx> out(static_cast<std::size_t>(points));
  std::vector<int> idx;
  for (long p = 0; p < points; ++p) {
    spectral::unravel(p, dims, idx);
    spectral::cplx acc = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        const auto& c = Shat[static_cast<std::size_t>(i * d + j)][static_cast<std::size_t>(p)];
        if (i == j) {
          acc -= second_wavenumber_sq(idx[static_cast<std::size_t>(i)], n) * c;
        } else {
          acc -= 2.0 * first_wavenumber(idx[static_cast<std::size_t>(i)], n) *
                 first_wavenumber(idx[static_cast<std::size_t>(j)], n) * c;
        }
      }
    out[static_cast<std::size_t>(p)] = acc;  // (i eta_i)(i eta_j) S_ij
  }
  return out;
}

std::vector<double> real_part_inverse(int n, int d, const std::vector<spectral::cplx>& coeffs) {
  const auto values = spectral::inverse(cube_dims(n, d), coeffs);
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = values[i].real();
  return out;
}

double laplace_symbol(const std::vector<int>& idx, int n) {
  double s = 0.0;
  for (int i : idx) s += second_wavenumber_sq(i, n);
  return s;
}

}  // namespace

std::vector<double> spectral_div_div(int n, int d, const std::vector<double>& second_moment) {
  return real_part_inverse(n, d, div_div_coefficients(n, d, second_moment));
}

std::vector<double> pressure_from_velocity(int n, int d, const std::vector<double>& second_moment) {
  auto coeffs = div_div_coefficients(n, d, second_moment);
  const auto dims = cube_dims(n, d);
  std::vector<int> idx;
  for (long p = 0; p < static_cast<long>(coeffs.size()); ++p) {
    spectral::unravel(p, dims, idx);
    const double lap = laplace_symbol(idx, n);
    coeffs[static_cast<std::size_t>(p)] = (p == 0) ? spectral::cplx(0.0) : coeffs[static_cast<std::size_t>(p)] / lap;
  }
  return real_part_inverse(n, d, coeffs);
}

std::vector<double> spectral_neg_laplacian(int n, int d, const std::vector<double>& field) {
  const auto dims = cube_dims(n, d);
  auto coeffs = spectral::forward_real(dims, field);
  std::vector<int> idx;
  for (long p = 0; p < static_cast<long>(coeffs.size()); ++p) {
    spectral::unravel(p, dims, idx);
    coeffs[static_cast<std::size_t>(p)] *= laplace_symbol(idx, n);
  }
  return real_part_inverse(n, d, coeffs);
}

// ---------------------------------------------------------------------------
// Dictionary and distance

namespace {

void enumerate_exponents(int m, int degree, std::vector<int>& current, int var, int remaining,
                         std::vector<std::vector<int>>& out) {
  if (var == m) {
    out.push_back(current);
    return;
  }
  for (int e = 0; e <= remaining; ++e) {
    current[static_cast<std::size_t>(var)] = e;
    enumerate_exponents(m, degree, current, var + 1, remaining - e, out);
  }
  current[static_cast<std::size_t>(var)] = 0;
}

}  // namespace

TestDictionary TestDictionary::monomials(int m, int degree, double radius) {
  require(m >= 1 && degree >= 0, "invalid monomial dictionary", "degree");
  require(radius > 0.0, "dictionary radius must be positive", "radius");
  std::vector<std::vector<int>> exps;
  std::vector<int> current(static_cast<std::size_t>(m), 0);
  enumerate_exponents(m, degree, current, 0, degree, exps);
  TestDictionary dict;
  for (const auto& e : exps) {
    std::ostringstream name;
    int total = 0;
    for (int v = 0; v < m; ++v) {
      total += e[static_cast<std::size_t>(v)];
      if (e[static_cast<std::size_t>(v)] > 0) name << "z" << v << "^" << e[static_cast<std::size_t>(v)] << " ";
    }
    std::string label = total == 0 ? "1" : name.str();
    if (!label.empty() && label.back() == ' ') label.pop_back();
    TestFunction f;
    f.name = "cutoff*" + label;
    f.dim = m;
    f.ball_radius = radius;
    f.bound = std::pow(radius, total);
    f.eval = [e, radius](const Eigen::VectorXd& z) {
      const double r2 = z.squaredNorm() / (radius * radius);
      if (r2 >= 1.0) return 0.0;
      const double c = 1.0 - r2;
      double v = c * c * c;
      for (Eigen::Index i = 0; i < z.size(); ++i)
        for (int k = 0; k < e[static_cast<std::size_t>(i)]; ++k) v *= z(i);
      return v;
    };
    dict.entries.push_back(std::move(f));
  }
  return dict;
}

double ym_distance(const YoungMeasure& nu1, const YoungMeasure& nu2, const TestDictionary& dict,
                   const WindowOptions& options) {
  require(nu1.grid().same_layout(nu2.grid()), "Young measures live on different grids", "grid");
  require(nu1.dim() == nu2.dim(), "Young measures have different state dimensions", "m");
  require(!dict.entries.empty(), "empty test dictionary", "dict");
  const auto& grid = nu1.grid();
  const long S = grid.cells_per_slice();
  const long nt = static_cast<long>(grid.times.size());

  const auto modes = quad::trig_family(grid.d, options.kmax);
  std::vector<double> trig(static_cast<std::size_t>(modes.size() * S));
  for (long s = 0; s < S; ++s) {
    const Eigen::VectorXd x = grid.cell_center(s);
    for (std::size_t k = 0; k < modes.size(); ++k) trig[k * S + s] = modes[k].value(x.data());
  }

  std::vector<std::vector<double>> time_weights;
  if (options.constant_time_factor)
    time_weights.push_back(quad::hat_weights(grid.times, [](double) { return 1.0; }, grid.T));
  if (options.bump_time_factor) {
    quad::TimeBump bump{grid.T};
    time_weights.push_back(quad::hat_weights(grid.times, [bump](double t) { return bump.value(t); }, grid.T));
  }
  require(!time_weights.empty(), "window family has no time factor", "window");

  const double vol = grid.cell_volume();
  double best = 0.0;
  std::vector<double> proj(static_cast<std::size_t>(nt) * modes.size());
  for (const auto& f : dict.entries) {
    std::fill(proj.begin(), proj.end(), 0.0);
    for (long t = 0; t < nt; ++t)
      for (long s = 0; s < S; ++s) {
        const double diff = pair(nu1.cell(t, s), f) - pair(nu2.cell(t, s), f);
        if (diff == 0.0) continue;
        for (std::size_t k = 0; k < modes.size(); ++k) proj[static_cast<std::size_t>(t) * modes.size() + k] += trig[k * S + s] * diff * vol;
      }
    for (const auto& w : time_weights)
      for (std::size_t k = 0; k < modes.size(); ++k) {
        double integral = 0.0;
        for (long t = 0; t < nt; ++t) integral += w[static_cast<std::size_t>(t)] * proj[static_cast<std::size_t>(t) * modes.size() + k];
        best = std::max(best, std::abs(integral));
      }
  }
  return best;
}

YoungMeasure empirical_from_field(const SampledField& field, int coarsen) {
  const auto& fine = field.grid;
  fine.validate();
  require(coarsen >= 1, "coarsening factor must be positive", "coarsen");
  require(fine.n % coarsen == 0, "coarsening factor must divide the grid size", "coarsen");
  require(static_cast<long>(field.values.size()) == fine.total_cells() * field.m, "field has wrong size", "values");

  SpacetimeGrid coarse = fine;
  coarse.n = fine.n / coarsen;
  const long Sf = fine.cells_per_slice();
  const long Sc = coarse.cells_per_slice();
  const int d = fine.d;
  const long block = Sf / Sc;

  std::vector<AtomicMeasure> cells;
  cells.reserve(static_cast<std::size_t>(coarse.total_cells()));
  std::vector<int> cidx(static_cast<std::size_t>(d));
  std::vector<int> off(static_cast<std::size_t>(d));
  for (std::size_t t = 0; t < fine.times.size(); ++t) {
    for (long sc = 0; sc < Sc; ++sc) {
      long rest = sc;
      for (int a = d - 1; a >= 0; --a) {
        cidx[static_cast<std::size_t>(a)] = static_cast<int>(rest % coarse.n);
        rest /= coarse.n;
      }
      std::vector<Eigen::VectorXd> points;
      points.reserve(static_cast<std::size_t>(block));
      for (long b = 0; b < block; ++b) {
        long r = b;
        for (int a = d - 1; a >= 0; --a) {
          off[static_cast<std::size_t>(a)] = static_cast<int>(r % coarsen);
          r /= coarsen;
        }
        long sf = 0;
        for (int a = 0; a < d; ++a) sf = sf * fine.n + cidx[static_cast<std::size_t>(a)] * coarsen + off[static_cast<std::size_t>(a)];
        const std::size_t base = (t * static_cast<std::size_t>(Sf) + static_cast<std::size_t>(sf)) * static_cast<std::size_t>(field.m);
        points.push_back(Eigen::Map<const Eigen::VectorXd>(field.values.data() + base, field.m));
      }
      cells.push_back(AtomicMeasure::uniform(points));
    }
  }
  return YoungMeasure(std::move(coarse), field.m, std::move(cells));
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const YoungMeasure& mu) {
  nlohmann::json grid = {{"d", mu.grid().d}, {"n", mu.grid().n}, {"T", mu.grid().T}, {"times", mu.grid().times}};
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : mu.cells()) {
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : c.atoms())
      atoms.push_back({{"w", a.weight}, {"x", std::vector<double>(a.point.data(), a.point.data() + a.point.size())}});
    cells.push_back(std::move(atoms));
  }
  return {{"schema", "lowmach.young_measure/1"}, {"grid", grid}, {"m", mu.dim()}, {"cells", cells}};
}

YoungMeasure young_measure_from_json(const nlohmann::json& doc) {
  require(doc.value("schema", "") == "lowmach.young_measure/1", "unsupported Young measure schema", "schema");
  SpacetimeGrid grid;
  const auto& g = doc.at("grid");
  grid.d = g.at("d").get<int>();
  grid.n = g.at("n").get<int>();
  grid.T = g.at("T").get<double>();
  grid.times = g.at("times").get<std::vector<double>>();
  const int m = doc.at("m").get<int>();
  std::vector<AtomicMeasure> cells;
  for (const auto& c : doc.at("cells")) {
    std::vector<Atom> atoms;
    for (const auto& a : c) {
      const auto x = a.at("x").get<std::vector<double>>();
      atoms.push_back({a.at("w").get<double>(), Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()))});
    }
    cells.emplace_back(std::move(atoms));
  }
  return YoungMeasure(std::move(grid), m, std::move(cells));
}

}  // namespace lowmach::young

#include "lowmach/limit_driver.hpp"

#include "lowmach/error.hpp"
#include "lowmach/parallel.hpp"
#include "lowmach/quadrature.hpp"
#include "lowmach/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace lowmach::limit {

using std::numbers::pi;

void MachLadder::validate() const {
  require(!eps_list.empty(), "ladder needs at least one eps", "eps_list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    require(std::isfinite(eps_list[i]) && eps_list[i] > 0.0, "ladder eps values must be positive", "eps_list");
    if (i > 0) require(eps_list[i] < eps_list[i - 1], "ladder eps values must be strictly decreasing", "eps_list");
  }
  SimConfig probe = base;
  probe.p.eps = eps_list.front();
  probe.validate();
}

std::vector<LadderRun> run_ladder(const MachLadder& ladder) {
  ladder.validate();
  std::vector<LadderRun> runs(ladder.eps_list.size());
  parallel_for(static_cast<long>(runs.size()), [&](long i) {
    const double eps = ladder.eps_list[static_cast<std::size_t>(i)];
    SimConfig cfg = ladder.base;
    cfg.p.eps = eps;
    LadderRun out;
    out.eps = eps;
    try {
      out.traj = run(cfg);
    } catch (const NumericalAbort& e) {
      std::ostringstream msg;
      msg << "eps = " << eps << ": " << e.what();
      throw NumericalAbort(msg.str());
    }
    for (const auto& snap : out.traj.snapshots) {
      std::vector<double> P(snap.rho.size());
      for (std::size_t k = 0; k < P.size(); ++k) P[k] = pressure_lift(snap.rho[k], cfg.p);
      out.lifted_pressure.push_back(std::move(P));
    }
    runs[static_cast<std::size_t>(i)] = std::move(out);
  });
  return runs;
}

namespace {

std::vector<double> snapshot_times(const Trajectory& traj) {
  std::vector<double> t;
  for (const auto& s : traj.snapshots) t.push_back(s.time);
  return t;
}

double cell_area(int n) { return 1.0 / (static_cast<double>(n) * n); }

double first_wavenumber(int index, int n) {
  if (n % 2 == 0 && index == n / 2) return 0.0;
  return 2.0 * pi * spectral::signed_wavenumber(index, n);
}

}  // namespace

double concentration_norm(const Trajectory& traj) {
  require(!traj.snapshots.empty(), "trajectory has no snapshots", "traj");
  const double rho_bar = traj.config.p.rho_bar;
  const auto W = quad::hat_weights(snapshot_times(traj), [](double) { return 1.0; }, traj.config.p.T);
  double total = 0.0;
  for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
    const auto& s = traj.snapshots[j];
    double sum = 0.0;
    for (double r : s.rho) sum += (r - rho_bar) * (r - rho_bar);
    total += W[j] * sum * cell_area(s.n);
  }
  return std::sqrt(std::max(0.0, total));
}

double lift_sup(const LadderRun& run) {
  double m = 0.0;
  for (const auto& P : run.lifted_pressure)
    for (double v : P) m = std::max(m, std::abs(v));
  return m;
}

double density_deviation_sup(const Trajectory& traj) {
  double m = 0.0;
  for (const auto& s : traj.snapshots)
    for (double r : s.rho) m = std::max(m, std::abs(r - traj.config.p.rho_bar));
  return m;
}

double incompressibility_residual(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& s : traj.snapshots) {
    const std::vector<int> dims{s.n, s.n};
    const auto ux = spectral::forward_real(dims, s.ux);
    const auto uy = spectral::forward_real(dims, s.uy);
    double sum = 0.0;
    for (int ix = 0; ix < s.n; ++ix)
      for (int iy = 0; iy < s.n; ++iy) {
        const auto k = static_cast<std::size_t>(ix * s.n + iy);
        const spectral::cplx div = first_wavenumber(ix, s.n) * ux[k] + first_wavenumber(iy, s.n) * uy[k];
        sum += std::norm(div);
      }
    worst = std::max(worst, std::sqrt(sum));
  }
  return worst;
}

RateFit concentration_rate(const std::vector<double>& eps, const std::vector<double>& norms) {
  require(eps.size() == norms.size(), "eps and norm lists differ in length", "reports");
  require(eps.size() >= 3, "rate fit needs at least three ladder points", "reports");
  const std::size_t m = eps.size();
  std::vector<double> x(m), y(m);
  for (std::size_t i = 0; i < m; ++i) {
    require(eps[i] > 0.0 && norms[i] > 0.0, "rate fit needs positive eps and norms", "reports");
    x[i] = std::log(eps[i]);
    y[i] = std::log(norms[i]);
  }
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  require(sxx > 0.0, "rate fit needs distinct eps values", "reports");
  RateFit r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double e = y[i] - (r.intercept + r.slope * x[i]);
    ss += e * e;
  }
  r.fit_residual = std::sqrt(ss / m);
  r.C = 2.0 * norms.front() / std::sqrt(eps.front());
  r.bound_holds = true;
  for (std::size_t i = 0; i < m; ++i)
    if (norms[i] > r.C * std::sqrt(eps[i])) r.bound_holds = false;
  r.pass = r.slope >= 0.45 && r.bound_holds;
  return r;
}

LiftBound lift_uniform_bound(const std::vector<double>& lift_sups) {
  require(!lift_sups.empty(), "lift bound needs at least one value", "reports");
  LiftBound b;
  bool finite = true;
  for (double v : lift_sups) {
    finite = finite && std::isfinite(v);
    b.sup = std::max(b.sup, v);
  }
  std::vector<double> sorted = lift_sups;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t m = sorted.size();
  b.median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  b.last = lift_sups.back();
  b.pass = finite && b.last <= 2.0 * b.median;
  return b;
}

young::SampledField lifted_field(const LadderRun& run, int time_stride) {
  require(time_stride >= 1, "time stride must be positive", "time_stride");
  const auto& snaps = run.traj.snapshots;
  require(!snaps.empty(), "run has no snapshots", "run");
  std::vector<std::size_t> picks;
  for (std::size_t j = 0; j < snaps.size(); j += static_cast<std::size_t>(time_stride)) picks.push_back(j);
  if (picks.back() != snaps.size() - 1) picks.push_back(snaps.size() - 1);

  young::SampledField f;
  f.grid.d = 2;
  f.grid.n = snaps.front().n;
  f.grid.T = run.traj.config.p.T;
  f.m = 3;
  const auto C = static_cast<std::size_t>(snaps.front().cells());
  for (std::size_t j : picks) {
    f.grid.times.push_back(snaps[j].time);
    for (std::size_t k = 0; k < C; ++k) {
      f.values.push_back(snaps[j].ux[k]);
      f.values.push_back(snaps[j].uy[k]);
      f.values.push_back(run.lifted_pressure[j][k]);
    }
  }
  return f;
}

LimitMeasure extract_limit_measure(const std::vector<LadderRun>& runs, int coarsen, int time_stride, bool cauchy) {
  require(!runs.empty(), "no ladder runs to extract from", "runs");
  LimitMeasure out;
  for (const auto& r : runs) out.ladder.push_back(young::empirical_from_field(lifted_field(r, time_stride), coarsen));
  double radius = 0.0;
  for (const auto& mu : out.ladder)
    for (const auto& c : mu.cells()) radius = std::max(radius, c.support_radius());
  out.dictionary_radius = 1.5 * std::max(radius, 1e-12);
  if (cauchy && out.ladder.size() >= 2) {
    const auto dict = young::TestDictionary::monomials(3, 4, out.dictionary_radius);
    for (std::size_t i = 0; i + 1 < out.ladder.size(); ++i)
      out.cauchy.push_back(young::ym_distance(out.ladder[i], out.ladder[i + 1], dict));
  }
  out.limit = out.ladder.back();
  return out;
}

std::vector<double> initial_velocity(const young::YoungMeasure& mu) {
  const int d = mu.dim() - 1;
  require(d >= 1, "expected a measure over (u, P)", "mu");
  const long S = mu.grid().cells_per_slice();
  std::vector<double> u0(static_cast<std::size_t>(S * d));
  for (long s = 0; s < S; ++s) {
    const Eigen::VectorXd b = mu.cell(0, s).barycenter();
    for (int a = 0; a < d; ++a) u0[static_cast<std::size_t>(s * d + a)] = b(a);
  }
  return u0;
}

AugmentedResidual augmented_solution_residual(const young::YoungMeasure& mu, const std::vector<double>& u0, int kmax) {
  const auto& grid = mu.grid();
  const int d = grid.d;
  require(mu.dim() == d + 1, "expected a measure over (u, P)", "mu");
  const long S = grid.cells_per_slice();
  require(static_cast<long>(u0.size()) == S * d, "initial velocity has the wrong size", "u0");
  const long nt = static_cast<long>(grid.times.size());
  const double vol = grid.cell_volume();

  // per cell: u (d), u (x) u (d*d), P
  const int stride = d + d * d + 1;
  std::vector<double> mom(static_cast<std::size_t>(S * nt * stride));
  for (long c = 0; c < S * nt; ++c) {
    double* out = &mom[static_cast<std::size_t>(c * stride)];
    for (const auto& a : mu.cells()[static_cast<std::size_t>(c)].atoms()) {
      for (int i = 0; i < d; ++i) {
        out[i] += a.weight * a.point(i);
        for (int j = 0; j < d; ++j) out[d + i * d + j] += a.weight * a.point(i) * a.point(j);
      }
      out[d + d * d] += a.weight * a.point(d);
    }
  }

  const quad::TimeBump bump{grid.T};
  const auto Wd = quad::hat_weights(grid.times, [&](double t) { return bump.derivative(t); }, grid.T);
  const auto W = quad::hat_weights(grid.times, [&](double t) { return bump.value(t); }, grid.T);
  const double b0 = bump.value(0.0);
  const auto modes = quad::trig_family(d, kmax);

  AugmentedResidual res;
  std::vector<double> phi(static_cast<std::size_t>(S));
  std::vector<double> grad(static_cast<std::size_t>(S * d));
  for (const auto& mode : modes) {
    for (long s = 0; s < S; ++s) {
      const Eigen::VectorXd x = grid.cell_center(s);
      phi[static_cast<std::size_t>(s)] = mode.value(x.data());
      for (int a = 0; a < d; ++a) grad[static_cast<std::size_t>(s * d + a)] = mode.gradient(x.data(), a);
    }
    for (int a = 0; a < d; ++a) {
      double total = 0.0;
      for (long t = 0; t < nt; ++t) {
        double dt_part = 0.0;
        double flux_part = 0.0;
        for (long s = 0; s < S; ++s) {
          const double* m = &mom[static_cast<std::size_t>((t * S + s) * stride)];
          dt_part += phi[static_cast<std::size_t>(s)] * m[a];
          for (int b = 0; b < d; ++b) flux_part += grad[static_cast<std::size_t>(s * d + b)] * m[d + a * d + b];
          flux_part += m[d + d * d] * grad[static_cast<std::size_t>(s * d + a)];
        }
        total += (Wd[static_cast<std::size_t>(t)] * dt_part + W[static_cast<std::size_t>(t)] * flux_part) * vol;
      }
      double init = 0.0;
      for (long s = 0; s < S; ++s) init += phi[static_cast<std::size_t>(s)] * u0[static_cast<std::size_t>(s * d + a)];
      total += b0 * init * vol;
      res.entries.push_back({"momentum", mode.k, mode.sine, a, std::abs(total)});
      res.max_momentum = std::max(res.max_momentum, std::abs(total));
    }
    if (std::all_of(mode.k.begin(), mode.k.end(), [](int v) { return v == 0; })) continue;
    double worst = 0.0;
    for (long t = 0; t < nt; ++t) {
      double div = 0.0;
      for (long s = 0; s < S; ++s)
        for (int a = 0; a < d; ++a)
          div += grad[static_cast<std::size_t>(s * d + a)] * mom[static_cast<std::size_t>((t * S + s) * stride + a)];
      worst = std::max(worst, std::abs(div * vol));
    }
    res.entries.push_back({"divergence", mode.k, mode.sine, -1, worst});
    res.max_divergence = std::max(res.max_divergence, worst);
  }
  res.max = std::max(res.max_momentum, res.max_divergence);
  return res;
}

double relative_energy(const FieldState& s, const std::vector<double>& Ux, const std::vector<double>& Uy) {
  const auto C = static_cast<std::size_t>(s.cells());
  require(Ux.size() == C && Uy.size() == C, "reference velocity has the wrong size", "U");
  double e = 0.0;
  for (std::size_t k = 0; k < C; ++k) {
    const double dx = s.ux[k] - Ux[k];
    const double dy = s.uy[k] - Uy[k];
    e += dx * dx + dy * dy;
  }
  return 0.5 * e * cell_area(s.n);
}

RelativeEnergySeries relative_energy_monitor(const Trajectory& traj, double A, double kappa) {
  require(!traj.snapshots.empty(), "trajectory has no snapshots", "traj");
  const int n = traj.snapshots.front().n;
  const auto C = static_cast<std::size_t>(n) * n;
  std::vector<double> Ux(C), Uy(C);
  RelativeEnergySeries r;
  r.kappa = kappa;
  double EU = 0.0;
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const auto k = static_cast<std::size_t>(ix * n + iy);
      const double x = (ix + 0.5) / n;
      const double y = (iy + 0.5) / n;
      const Eigen::Vector2d U = vortex_velocity(A, x, y);
      Ux[k] = U(0);
      Uy[k] = U(1);
      EU += 0.5 * U.squaredNorm() * cell_area(n);
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(vortex_gradient(A, x, y));
      r.grad_sup = std::max(r.grad_sup, svd.singularValues()(0));
    }
  const double h = 1.0 / n;
  const double eps = traj.config.p.eps;
  r.bound_holds = true;
  double need = 0.0;
  for (const auto& s : traj.snapshots) {
    const double t = s.time;
    const double e = relative_energy(s, Ux, Uy);
    r.times.push_back(t);
    r.e_rel.push_back(e);
    const double model = kappa * (h + eps) * t * EU;
    r.model_error.push_back(model);
    const double growth = std::exp(2.0 * r.grad_sup * t);
    r.bound.push_back((r.e_rel.front() + model) * growth);
    if (e > r.bound.back()) r.bound_holds = false;
    if (t > 0.0 && EU > 0.0) need = std::max(need, (e / growth - r.e_rel.front()) / ((h + eps) * t * EU));
  }
  r.required_kappa = need;
  return r;
}

std::vector<double> taylor_gap_field(const FieldState& s, const Params& p) {
  std::vector<double> g(s.rho.size());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::abs(taylor_remainder(s.rho[k], p.rho_bar, p.gamma)) / (p.eps * p.rho_bar);
  return g;
}

double taylor_consistency(const Trajectory& traj) {
  require(!traj.snapshots.empty(), "trajectory has no snapshots", "traj");
  const auto W = quad::hat_weights(snapshot_times(traj), [](double) { return 1.0; }, traj.config.p.T);
  double total = 0.0;
  for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
    const auto g = taylor_gap_field(traj.snapshots[j], traj.config.p);
    total += W[j] * std::accumulate(g.begin(), g.end(), 0.0) * cell_area(traj.snapshots[j].n);
  }
  return total;
}

jensen::JensenReport jensen_necessary_check(const young::YoungMeasure& mu, const young::TestDictionary& dict,
                                            const jensen::JensenReportOptions& options) {
  return jensen::jensen_report(mu, dict, options);
}

MachRunReport analyze_ladder(const MachLadder& ladder, const std::vector<LadderRun>& runs,
                             const LadderAnalysisOptions& options) {
  require(!runs.empty(), "no ladder runs to analyse", "runs");
  MachRunReport report;
  report.seed = options.jensen.seed;
  const LimitMeasure lm = extract_limit_measure(runs, options.coarsen, options.measure_time_stride, options.run_cauchy);
  report.cauchy = lm.cauchy;

  const bool vortex = ladder.base.init.name == "wellprepared_vortex";
  const double A = vortex ? ladder.base.init.amplitude : 0.0;
  std::vector<double> eps, norms, lifts;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& run = runs[i];
    const Params& p = run.traj.config.p;
    RunMetrics m;
    m.eps = run.eps;
    m.steps = run.traj.steps;
    m.concentration_norm = concentration_norm(run.traj);
    m.lift_sup = lift_sup(run);
    m.density_deviation_sup = density_deviation_sup(run.traj);
    if (p.gamma == 2.0) {
      const double dev = m.density_deviation_sup;
      m.lift_cross_check = m.lift_sup <= (2.0 * p.rho_bar + dev) * dev / (p.eps * p.rho_bar) * (1.0 + 1e-12);
    } else {
      m.lift_cross_check = true;
    }
    m.incompressibility_residual = incompressibility_residual(run.traj);
    const auto adm = admissibility_check(run.traj);
    m.energy_excess = adm.max_excess;
    m.energy_nonincreasing = adm.nonincreasing;
    const auto rel = relative_energy_monitor(run.traj, A, options.kappa);
    m.e_rel_final = rel.e_rel.back();
    m.relative_energy_bound = rel.bound_holds;
    m.taylor_gap = taylor_consistency(run.traj);
    const auto& mu = lm.ladder[i];
    m.augmented_residual = augmented_solution_residual(mu, initial_velocity(mu)).max;
    double var = 0.0;
    for (const auto& c : mu.cells()) {
      double mean = 0.0, sq = 0.0;
      for (const auto& a : c.atoms()) {
        mean += a.weight * a.point(2);
        sq += a.weight * a.point(2) * a.point(2);
      }
      var += std::max(0.0, sq - mean * mean);
    }
    m.pressure_variance = var / static_cast<double>(mu.cells().size());
    report.runs.push_back(m);
    eps.push_back(m.eps);
    norms.push_back(m.concentration_norm);
    lifts.push_back(m.lift_sup);
  }
  if (runs.size() >= 3) report.concentration = concentration_rate(eps, norms);
  report.lift = lift_uniform_bound(lifts);

  if (options.run_jensen) {
    jensen::JensenReportOptions jo = options.jensen;
    jo.time_stride = options.jensen_time_stride;
    report.jensen = jensen_necessary_check(lm.limit, jensen::default_dictionary(2, Eigen::Vector2d::Zero(), 0.0), jo);
    report.jensen_evaluated = true;
  }
  return report;
}

nlohmann::json to_json(const MachRunReport& r, bool include_cells) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& m : r.runs)
    runs.push_back({{"eps", m.eps},
                    {"steps", m.steps},
                    {"concentration_norm", m.concentration_norm},
                    {"lift_sup", m.lift_sup},
                    {"density_deviation_sup", m.density_deviation_sup},
                    {"lift_cross_check", m.lift_cross_check},
                    {"incompressibility_residual", m.incompressibility_residual},
                    {"energy_excess", m.energy_excess},
                    {"energy_nonincreasing", m.energy_nonincreasing},
                    {"e_rel_final", m.e_rel_final},
                    {"relative_energy_bound", m.relative_energy_bound},
                    {"taylor_gap", m.taylor_gap},
                    {"augmented_residual", m.augmented_residual},
                    {"pressure_variance", m.pressure_variance}});
  nlohmann::json doc = {
      {"schema", "lowmach.ladder_report/1"},
      {"seed", r.seed},
      {"runs", runs},
      {"concentration",
       {{"slope", r.concentration.slope},
        {"intercept", r.concentration.intercept},
        {"fit_residual", r.concentration.fit_residual},
        {"C", r.concentration.C},
        {"bound_holds", r.concentration.bound_holds},
        {"pass", r.concentration.pass}}},
      {"lift_bound", {{"sup", r.lift.sup}, {"last", r.lift.last}, {"median", r.lift.median}, {"pass", r.lift.pass}}},
      {"cauchy", r.cauchy}};
  if (r.jensen_evaluated) {
    nlohmann::json j = jensen::to_json(r.jensen);
    if (!include_cells) j.erase("cells");
    doc["jensen"] = j;
  }
  return doc;
}

}  // namespace lowmach::limit

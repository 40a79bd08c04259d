#include "lowmach/compressible_solver.hpp"

#include "lowmach/error.hpp"
#include "lowmach/parallel.hpp"
#include "lowmach/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace lowmach {

using std::numbers::pi;

void FieldState::validate() const {
  require(n >= 1, "field needs at least one cell", "n");
  const auto c = static_cast<std::size_t>(cells());
  require(rho.size() == c && ux.size() == c && uy.size() == c, "field arrays have the wrong size", "state");
  for (std::size_t i = 0; i < c; ++i) {
    require(std::isfinite(rho[i]) && std::isfinite(ux[i]) && std::isfinite(uy[i]), "field values must be finite", "state");
    require(rho[i] > 0.0, "density must be positive", "rho");
  }
}

std::string to_string(FluxKind f) { return f == FluxKind::rusanov ? "rusanov" : "rusanov_lowmach"; }

FluxKind flux_from_string(const std::string& s) {
  if (s == "rusanov") return FluxKind::rusanov;
  if (s == "rusanov_lowmach") return FluxKind::rusanov_lowmach;
  throw ValidationError("unknown flux '" + s + "'", "flux");
}

void SimConfig::validate() const {
  p.validate();
  require(p.d == 2, "the solver is two-dimensional", "d");
  require(n >= 16, "solver needs n >= 16", "n");
  require(cfl > 0.0 && cfl <= 0.45, "cfl must lie in (0, 0.45]", "cfl");
  require(max_steps > 0, "max_steps must be positive", "max_steps");
  if (snapshot_times.empty()) {
    require(snapshot_count >= 2, "need at least two snapshots", "snapshot_count");
  } else {
    for (std::size_t i = 0; i < snapshot_times.size(); ++i) {
      require(snapshot_times[i] >= 0.0 && snapshot_times[i] <= p.T, "snapshot times must lie in [0, T]", "snapshot_times");
      if (i > 0) require(snapshot_times[i] >= snapshot_times[i - 1], "snapshot times must be nondecreasing", "snapshot_times");
    }
  }
  const auto& r = init.name;
  require(r == "wellprepared_vortex" || r == "shear" || r == "illprepared_acoustic" || r == "uniform",
          "unknown initial-data recipe '" + r + "'", "init.name");
  if (r == "illprepared_acoustic") require(std::abs(init.delta) < 1.0, "delta must satisfy |delta| < 1", "init.delta");
}

std::vector<double> SimConfig::resolved_snapshot_times() const {
  if (!snapshot_times.empty()) return snapshot_times;
  std::vector<double> t(static_cast<std::size_t>(snapshot_count));
  for (int j = 0; j < snapshot_count; ++j) t[static_cast<std::size_t>(j)] = p.T * j / (snapshot_count - 1);
  t.back() = p.T;
  return t;
}

double sound_speed(double rho, const Params& p) {
  require(rho > 0.0, "sound speed needs positive density", "rho");
  return std::sqrt(p.gamma * std::pow(rho, p.gamma - 1.0) / p.eps);
}

double stable_dt(const FieldState& s, const Params& p, double cfl) {
  double smax = 0.0;
  for (long i = 0; i < s.cells(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    smax = std::max(smax, std::hypot(s.ux[k], s.uy[k]) + sound_speed(s.rho[k], p));
  }
  return cfl / (s.n * smax);
}

namespace {

struct Prim {
  double rho, ux, uy, p, c;
};

// Flux through a face with normal along axis `a` (0: x, 1: y), L to R.
void face_flux(const Prim& L, const Prim& R, int a, double theta, double out[3]) {
  const double unL = a == 0 ? L.ux : L.uy;
  const double unR = a == 0 ? R.ux : R.uy;
  const double s = std::max(std::abs(unL) + L.c, std::abs(unR) + R.c);
  const double drho = R.rho - L.rho;
  const double rbar = 0.5 * (L.rho + R.rho);
  const double ubx = 0.5 * (L.ux + R.ux);
  const double uby = 0.5 * (L.uy + R.uy);
  const double pc = 0.5 * (L.p + R.p);

  out[0] = 0.5 * (L.rho * unL + R.rho * unR) - 0.5 * s * drho;
  out[1] = 0.5 * (L.rho * L.ux * unL + R.rho * R.ux * unR) + (a == 0 ? pc : 0.0) -
           0.5 * s * (ubx * drho + theta * rbar * (R.ux - L.ux));
  out[2] = 0.5 * (L.rho * L.uy * unL + R.rho * R.uy * unR) + (a == 1 ? pc : 0.0) -
           0.5 * s * (uby * drho + theta * rbar * (R.uy - L.uy));
}

}  // namespace

FieldState step(const FieldState& s, const Params& p, double cfl, FluxKind flux, double dt_max) {
  const int n = s.n;
  const long C = s.cells();
  std::vector<Prim> prim(static_cast<std::size_t>(C));
  double smax = 0.0;
  double umax = 0.0;
  double cmin = std::numeric_limits<double>::infinity();
  for (long i = 0; i < C; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const double r = s.rho[k];
    if (!(r >= kDensityFloor) || !std::isfinite(s.ux[k]) || !std::isfinite(s.uy[k])) {
      std::ostringstream msg;
      msg << "density floor breached or non-finite state at cell " << i << " (rho = " << r << ", t = " << s.time << ")";
      throw NumericalAbort(msg.str());
    }
    const double c = sound_speed(r, p);
    const double speed = std::hypot(s.ux[k], s.uy[k]);
    prim[k] = {r, s.ux[k], s.uy[k], pow_difference(r, p.rho_bar, p.gamma) / p.eps, c};
    smax = std::max(smax, speed + c);
    umax = std::max(umax, speed);
    cmin = std::min(cmin, c);
  }
  const double h = 1.0 / n;
  const double dt = std::min(cfl * h / smax, dt_max);
  const double theta = flux == FluxKind::rusanov ? 1.0 : std::min(1.0, umax / cmin);

  std::vector<double> Fx(static_cast<std::size_t>(3 * C));
  std::vector<double> Fy(static_cast<std::size_t>(3 * C));
  parallel_for(n, [&](long ix) {
    for (int iy = 0; iy < n; ++iy) {
      const long i = ix * n + iy;
      const long right = ((ix + 1) % n) * n + iy;
      const long up = ix * n + (iy + 1) % n;
      face_flux(prim[static_cast<std::size_t>(i)], prim[static_cast<std::size_t>(right)], 0, theta, &Fx[static_cast<std::size_t>(3 * i)]);
      face_flux(prim[static_cast<std::size_t>(i)], prim[static_cast<std::size_t>(up)], 1, theta, &Fy[static_cast<std::size_t>(3 * i)]);
    }
  });

  FieldState out;
  out.n = n;
  out.time = s.time + dt;
  out.rho.resize(static_cast<std::size_t>(C));
  out.ux.resize(static_cast<std::size_t>(C));
  out.uy.resize(static_cast<std::size_t>(C));
  const double lam = dt / h;
  parallel_for(n, [&](long ix) {
    for (int iy = 0; iy < n; ++iy) {
      const long i = ix * n + iy;
      const long left = ((ix + n - 1) % n) * n + iy;
      const long down = ix * n + (iy + n - 1) % n;
      const auto k = static_cast<std::size_t>(i);
      const double* fr = &Fx[static_cast<std::size_t>(3 * i)];
      const double* fl = &Fx[static_cast<std::size_t>(3 * left)];
      const double* gu = &Fy[static_cast<std::size_t>(3 * i)];
      const double* gd = &Fy[static_cast<std::size_t>(3 * down)];
      const double rho = s.rho[k] - lam * ((fr[0] - fl[0]) + (gu[0] - gd[0]));
      const double mx = s.rho[k] * s.ux[k] - lam * ((fr[1] - fl[1]) + (gu[1] - gd[1]));
      const double my = s.rho[k] * s.uy[k] - lam * ((fr[2] - fl[2]) + (gu[2] - gd[2]));
      out.rho[k] = rho;
      out.ux[k] = mx / rho;
      out.uy[k] = my / rho;
    }
  });
  for (long i = 0; i < C; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (!(out.rho[k] >= kDensityFloor) || !std::isfinite(out.ux[k]) || !std::isfinite(out.uy[k])) {
      std::ostringstream msg;
      msg << "density floor breached or non-finite state at cell " << i << " (rho = " << out.rho[k]
          << ", t = " << out.time << ")";
      throw NumericalAbort(msg.str());
    }
  }
  return out;
}

Trajectory run(const SimConfig& config) {
  config.validate();
  Trajectory traj;
  traj.config = config;
  const auto times = config.resolved_snapshot_times();
  FieldState state = init_recipe(config.init, config.n, config.p);
  traj.energy_times.push_back(0.0);
  traj.energy.push_back(energy_total(state, config.p));
  const double tiny = 1e-14 * config.p.T;
  for (double target : times) {
    while (state.time < target - tiny) {
      const double remaining = target - state.time;
      state = step(state, config.p, config.cfl, config.flux, remaining);
      if (std::abs(state.time - target) <= tiny) state.time = target;
      ++traj.steps;
      if (traj.steps > config.max_steps) throw NumericalAbort("step budget exhausted before reaching T");
      traj.energy_times.push_back(state.time);
      traj.energy.push_back(energy_total(state, config.p));
    }
    FieldState snap = state;
    snap.time = target;
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

Eigen::Vector2d vortex_velocity(double A, double x, double y) {
  const double sx = std::sin(2 * pi * x), cx = std::cos(2 * pi * x);
  const double sy = std::sin(2 * pi * y), cy = std::cos(2 * pi * y);
  return {-2 * pi * A * sx * cy, 2 * pi * A * cx * sy};
}

Eigen::Matrix2d vortex_gradient(double A, double x, double y) {
  const double sx = std::sin(2 * pi * x), cx = std::cos(2 * pi * x);
  const double sy = std::sin(2 * pi * y), cy = std::cos(2 * pi * y);
  const double k = 4 * pi * pi * A;
  Eigen::Matrix2d g;
  g << -k * cx * cy, k * sx * sy, -k * sx * sy, k * cx * cy;
  return g;
}

FieldState init_recipe(const InitRecipe& recipe, int n, const Params& p) {
  p.validate();
  require(n >= 1, "grid needs at least one cell", "n");
  FieldState s;
  s.n = n;
  s.rho.assign(static_cast<std::size_t>(n) * n, p.rho_bar);
  s.ux.assign(static_cast<std::size_t>(n) * n, 0.0);
  s.uy.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy) {
      const auto k = static_cast<std::size_t>(ix * n + iy);
      const double x = (ix + 0.5) / n;
      const double y = (iy + 0.5) / n;
      if (recipe.name == "wellprepared_vortex") {
        const Eigen::Vector2d u = vortex_velocity(recipe.amplitude, x, y);
        s.ux[k] = u(0);
        s.uy[k] = u(1);
      } else if (recipe.name == "shear") {
        s.ux[k] = recipe.amplitude * std::sin(2 * pi * y);
      } else if (recipe.name == "illprepared_acoustic") {
        s.rho[k] = p.rho_bar * (1.0 + recipe.delta * std::sin(2 * pi * x));
      } else if (recipe.name == "uniform") {
        s.ux[k] = recipe.ux;
        s.uy[k] = recipe.uy;
      } else {
        throw ValidationError("unknown initial-data recipe '" + recipe.name + "'", "init.name");
      }
    }
  s.validate();
  return s;
}

double energy_total(const FieldState& s, const Params& p) {
  const double h2 = 1.0 / (static_cast<double>(s.n) * s.n);
  double e = 0.0;
  for (long i = 0; i < s.cells(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    e += 0.5 * s.rho[k] * (s.ux[k] * s.ux[k] + s.uy[k] * s.uy[k]) + std::pow(s.rho[k], p.gamma) / (p.eps * (p.gamma - 1.0));
  }
  return e * h2;
}

double energy_relative_wellprepared(const FieldState& s, const Params& p, const std::vector<double>& Ux,
                                    const std::vector<double>& Uy) {
  const auto C = static_cast<std::size_t>(s.cells());
  require(Ux.empty() || Ux.size() == C, "reference velocity has the wrong size", "U");
  require(Uy.empty() || Uy.size() == C, "reference velocity has the wrong size", "U");
  const double h2 = 1.0 / (static_cast<double>(s.n) * s.n);
  double e = 0.0;
  for (std::size_t k = 0; k < C; ++k) {
    const double dx = s.ux[k] - (Ux.empty() ? 0.0 : Ux[k]);
    const double dy = s.uy[k] - (Uy.empty() ? 0.0 : Uy[k]);
    e += 0.5 * s.rho[k] * (dx * dx + dy * dy) + taylor_remainder(s.rho[k], p.rho_bar, p.gamma) / (p.eps * (p.gamma - 1.0));
  }
  return e * h2;
}

AdmissibilityResult admissibility_check(const std::vector<double>& energy, double rel_tol) {
  require(!energy.empty(), "energy series is empty", "energy");
  AdmissibilityResult r;
  const double E0 = energy.front();
  r.tolerance = rel_tol * std::abs(E0);
  for (std::size_t i = 1; i < energy.size(); ++i) {
    r.max_excess = std::max(r.max_excess, energy[i] - E0);
    r.max_increase = std::max(r.max_increase, energy[i] - energy[i - 1]);
  }
  r.admissible = r.max_excess <= r.tolerance;
  r.nonincreasing = r.max_increase <= r.tolerance;
  return r;
}

AdmissibilityResult admissibility_check(const Trajectory& traj, double rel_tol) {
  return admissibility_check(traj.energy, rel_tol);
}

WeakResidualTable weak_residual(const Trajectory& traj, int kmax) {
  const auto& snaps = traj.snapshots;
  require(snaps.size() >= 16, "weak residual needs at least 16 snapshots", "snapshots");
  const Params& p = traj.config.p;
  const int n = snaps.front().n;
  const long C = snaps.front().cells();
  const double h2 = 1.0 / (static_cast<double>(n) * n);

  std::vector<double> times;
  for (const auto& s : snaps) times.push_back(s.time);
  const quad::TimeBump bump{p.T};
  const auto Wd = quad::hat_weights(times, [&](double t) { return bump.derivative(t); }, p.T);
  const auto W = quad::hat_weights(times, [&](double t) { return bump.value(t); }, p.T);
  const double b0 = bump.value(0.0);

  const auto modes = quad::trig_family(2, kmax);
  const std::size_t nm = modes.size();
  std::vector<double> phi(nm * static_cast<std::size_t>(C)), gx(phi.size()), gy(phi.size());
  for (long i = 0; i < C; ++i) {
    const double x[2] = {(static_cast<double>(i / n) + 0.5) / n, (static_cast<double>(i % n) + 0.5) / n};
    for (std::size_t m = 0; m < nm; ++m) {
      const std::size_t k = m * static_cast<std::size_t>(C) + static_cast<std::size_t>(i);
      phi[k] = modes[m].value(x);
      gx[k] = modes[m].gradient(x, 0);
      gy[k] = modes[m].gradient(x, 1);
    }
  }

  // per mode: continuity, momentum x, momentum y accumulators
  std::vector<double> acc(nm * 3, 0.0);
  auto integrate = [&](const FieldState& s, double wd, double w, double w0) {
    for (std::size_t m = 0; m < nm; ++m) {
      double c = 0.0, mx = 0.0, my = 0.0;
      for (long i = 0; i < C; ++i) {
        const auto q = static_cast<std::size_t>(i);
        const std::size_t k = m * static_cast<std::size_t>(C) + q;
        const double r = s.rho[q], ux = s.ux[q], uy = s.uy[q];
        const double pr = pow_difference(r, p.rho_bar, p.gamma) / p.eps;
        const double time_part_c = (wd + w0) * phi[k] * (r - p.rho_bar);
        c += time_part_c + w * (gx[k] * r * ux + gy[k] * r * uy);
        mx += (wd + w0) * phi[k] * r * ux + w * (gx[k] * r * ux * ux + gy[k] * r * ux * uy + pr * gx[k]);
        my += (wd + w0) * phi[k] * r * uy + w * (gx[k] * r * uy * ux + gy[k] * r * uy * uy + pr * gy[k]);
      }
      acc[3 * m] += c * h2;
      acc[3 * m + 1] += mx * h2;
      acc[3 * m + 2] += my * h2;
    }
  };
  // the initial-data term shares the spatial integrand of the d_t phi term
  for (std::size_t j = 0; j < snaps.size(); ++j) integrate(snaps[j], Wd[j], W[j], 0.0);
  FieldState initial = init_recipe(traj.config.init, n, p);
  if (std::abs(snaps.front().time) <= 1e-14 * p.T) initial = snaps.front();
  integrate(initial, 0.0, 0.0, b0);

  WeakResidualTable table;
  for (std::size_t m = 0; m < nm; ++m) {
    table.entries.push_back({"continuity", modes[m].k, modes[m].sine, -1, std::abs(acc[3 * m])});
    table.entries.push_back({"momentum", modes[m].k, modes[m].sine, 0, std::abs(acc[3 * m + 1])});
    table.entries.push_back({"momentum", modes[m].k, modes[m].sine, 1, std::abs(acc[3 * m + 2])});
    table.max_continuity = std::max(table.max_continuity, std::abs(acc[3 * m]));
    table.max_momentum = std::max({table.max_momentum, std::abs(acc[3 * m + 1]), std::abs(acc[3 * m + 2])});
  }
  return table;
}

nlohmann::json to_json(const WeakResidualTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : t.entries)
    rows.push_back({{"equation", e.equation}, {"k", e.k}, {"sine", e.sine}, {"component", e.component}, {"value", e.value}});
  return {{"max_continuity", t.max_continuity}, {"max_momentum", t.max_momentum}, {"entries", rows}};
}

}  // namespace lowmach

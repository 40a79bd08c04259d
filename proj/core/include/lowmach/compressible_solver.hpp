#pragma once

// Explicit finite-volume solver for the isentropic Euler equations with
// pressure rho^gamma / eps on the periodic unit square, plus energy and
// weak-residual monitors.
//
// Cell (ix, iy) has centre ((ix + 1/2) h, (iy + 1/2) h), h = 1/n, and flat
// index ix * n + iy.

#include "lowmach/state_space.hpp"

#include <nlohmann/json.hpp>

#include <limits>
#include <string>
#include <vector>

namespace lowmach {

inline constexpr double kDensityFloor = 1e-8;

struct FieldState {
  int n = 0;
  double time = 0.0;
  std::vector<double> rho;
  std::vector<double> ux;
  std::vector<double> uy;

  long cells() const { return static_cast<long>(n) * n; }
  void validate() const;
};

enum class FluxKind {
  rusanov,          // local Lax-Friedrichs on (rho, rho u)
  rusanov_lowmach,  // same density dissipation, velocity-jump dissipation scaled by the Mach number
};

std::string to_string(FluxKind f);
FluxKind flux_from_string(const std::string& s);

struct InitRecipe {
  std::string name = "wellprepared_vortex";  // wellprepared_vortex | shear | illprepared_acoustic | uniform
  double amplitude = 0.05;                   // vortex A, shear a
  double delta = 0.1;                        // ill-prepared density perturbation
  double ux = 0.0;                           // uniform state velocity
  double uy = 0.0;
};

struct SimConfig {
  int n = 64;
  Params p;
  double cfl = 0.4;
  FluxKind flux = FluxKind::rusanov_lowmach;
  InitRecipe init;
  int snapshot_count = 64;             // uniform snapshots including t = 0 and t = T
  std::vector<double> snapshot_times;  // overrides snapshot_count when nonempty
  long max_steps = 50'000'000;

  void validate() const;
  std::vector<double> resolved_snapshot_times() const;
};

struct Trajectory {
  SimConfig config;
  std::vector<FieldState> snapshots;
  std::vector<double> energy_times;  // t = 0 and after every step
  std::vector<double> energy;
  long steps = 0;
};

/// sqrt(gamma rho^(gamma-1) / eps).
double sound_speed(double rho, const Params& p);

/// cfl * h / max(|u| + c).
double stable_dt(const FieldState& s, const Params& p, double cfl);

/// One forward-Euler finite-volume step of size min(stable_dt, dt_max).
FieldState step(const FieldState& s, const Params& p, double cfl, FluxKind flux = FluxKind::rusanov_lowmach,
                double dt_max = std::numeric_limits<double>::infinity());

Trajectory run(const SimConfig& config);

FieldState init_recipe(const InitRecipe& recipe, int n, const Params& p);

/// Analytic vortex velocity U = grad-perp(A sin 2 pi x sin 2 pi y) at (x, y).
Eigen::Vector2d vortex_velocity(double A, double x, double y);
/// Velocity gradient dU_i/dx_j of the analytic vortex.
Eigen::Matrix2d vortex_gradient(double A, double x, double y);

/// Cell-sum of 1/2 rho |u|^2 + rho^gamma / (eps (gamma - 1)).
double energy_total(const FieldState& s, const Params& p);

/// Cell-sum of 1/2 rho |u - U|^2 + (rho^gamma - gamma rho_bar^(gamma-1)(rho - rho_bar) - rho_bar^gamma) / (eps (gamma - 1)).
/// Empty reference velocity fields mean U = 0.
double energy_relative_wellprepared(const FieldState& s, const Params& p, const std::vector<double>& Ux = {},
                                    const std::vector<double>& Uy = {});

struct AdmissibilityResult {
  bool admissible = false;
  bool nonincreasing = false;
  double max_excess = 0.0;  // max_k (E_k - E_0)_+
  double max_increase = 0.0;
  double tolerance = 0.0;
};

AdmissibilityResult admissibility_check(const std::vector<double>& energy, double rel_tol = 1e-10);
AdmissibilityResult admissibility_check(const Trajectory& traj, double rel_tol = 1e-10);

struct WeakResidualEntry {
  std::string equation;  // "continuity" or "momentum"
  std::vector<int> k;
  bool sine = false;
  int component = -1;  // momentum component, -1 for continuity
  double value = 0.0;
};

struct WeakResidualTable {
  std::vector<WeakResidualEntry> entries;
  double max_continuity = 0.0;
  double max_momentum = 0.0;
};

/// Weak-form residuals against trig modes |k_a| <= kmax times the time bump,
/// including the initial-data terms. Requires at least 16 snapshots.
WeakResidualTable weak_residual(const Trajectory& traj, int kmax = 4);

nlohmann::json to_json(const WeakResidualTable& t);

// Snapshot files
void write_snapshot(const std::string& path, const FieldState& s, const Params& p);
FieldState read_snapshot(const std::string& path, Params* p = nullptr);
void write_energy_sidecar(const std::string& path, const Trajectory& traj);

}  // namespace lowmach

#pragma once

// Low Mach ladders: solver runs over decreasing eps, pressure lifts,
// empirical Young measures and the diagnostics evaluated on them.

#include "lowmach/compressible_solver.hpp"
#include "lowmach/jensen.hpp"
#include "lowmach/young_measure.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lowmach::limit {

struct MachLadder {
  std::vector<double> eps_list{1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
  SimConfig base;  // p.eps is overridden per rung

  void validate() const;
};

struct LadderRun {
  double eps = 0.0;
  Trajectory traj;
  /// (rho^gamma - rho_bar^gamma) / (eps rho_bar) per snapshot and cell.
  std::vector<std::vector<double>> lifted_pressure;
};

/// Runs every rung (independent solver instances). Solver failures are
/// rethrown with the offending eps in the message.
std::vector<LadderRun> run_ladder(const MachLadder& ladder);

// --- per-run measurements ---------------------------------------------------

/// ||rho - rho_bar||_{L^2((0,T) x T^2)} with piecewise-linear time reconstruction.
double concentration_norm(const Trajectory& traj);
/// sup over snapshots and cells of |lifted pressure|.
double lift_sup(const LadderRun& run);
/// sup over snapshots and cells of |rho - rho_bar|.
double density_deviation_sup(const Trajectory& traj);
/// max over snapshots of the spectral L^2 norm of div u.
double incompressibility_residual(const Trajectory& traj);

// --- fits and bounds --------------------------------------------------------

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double fit_residual = 0.0;  // RMS of log residuals
  double C = 0.0;             // constant in norm <= C sqrt(eps)
  bool bound_holds = false;
  bool pass = false;
};

/// Least-squares fit of log(norm) against log(eps). The bound uses
/// C = 2 * norm_0 / sqrt(eps_0), calibrated on the coarsest rung.
RateFit concentration_rate(const std::vector<double>& eps, const std::vector<double>& norms);

struct LiftBound {
  double sup = 0.0;
  double last = 0.0;
  double median = 0.0;
  bool pass = false;
};

/// PASS when every value is finite and the last one is at most twice the median.
LiftBound lift_uniform_bound(const std::vector<double>& lift_sups);

// --- Young measures ---------------------------------------------------------

/// (u, P) samples of a run on its fine grid, every `time_stride`-th snapshot
/// (the final snapshot is always kept).
young::SampledField lifted_field(const LadderRun& run, int time_stride = 1);

struct LimitMeasure {
  young::YoungMeasure limit;                // finest-eps measure
  std::vector<young::YoungMeasure> ladder;  // one per rung, same order as the runs
  std::vector<double> cauchy;               // distance between consecutive rungs
  double dictionary_radius = 0.0;
};

LimitMeasure extract_limit_measure(const std::vector<LadderRun>& runs, int coarsen, int time_stride = 1,
                                   bool cauchy = true);

struct AugmentedResidualEntry {
  std::string equation;  // "momentum" or "divergence"
  std::vector<int> k;
  bool sine = false;
  int component = -1;
  double value = 0.0;
};

struct AugmentedResidual {
  std::vector<AugmentedResidualEntry> entries;
  double max_momentum = 0.0;
  double max_divergence = 0.0;
  double max = 0.0;
};

/// Both defining integrals of an augmented solution, tested against trig
/// modes |k_a| <= kmax times the time bump (momentum, with the initial-data
/// term) and against trig modes at every time node (divergence constraint).
/// u0 holds d values per spatial cell of the measure's grid.
AugmentedResidual augmented_solution_residual(const young::YoungMeasure& mu, const std::vector<double>& u0,
                                              int kmax = 4);

/// t = 0 barycentre velocity of a (u, P) measure, d values per cell.
std::vector<double> initial_velocity(const young::YoungMeasure& mu);

// --- relative energy ---------------------------------------------------------

/// 1/2 sum_cells h^2 |u - U|^2.
double relative_energy(const FieldState& s, const std::vector<double>& Ux, const std::vector<double>& Uy);

struct RelativeEnergySeries {
  std::vector<double> times;
  std::vector<double> e_rel;
  std::vector<double> bound;
  std::vector<double> model_error;  // kappa (h + eps) t E_U
  double grad_sup = 0.0;            // sup |grad U| (spectral norm)
  double kappa = 10.0;
  bool bound_holds = false;
  double required_kappa = 0.0;  // smallest kappa for which the bound holds
};

/// Against the analytic steady vortex of amplitude A:
/// E_rel(t) <= (E_rel(0) + kappa (h + eps) t E_U) exp(2 sup|grad U| t).
RelativeEnergySeries relative_energy_monitor(const Trajectory& traj, double A, double kappa = 10.0);

// --- Taylor consistency ------------------------------------------------------

/// |(rho^gamma - rho_bar^gamma)/(eps rho_bar) - gamma rho_bar^(gamma-2) (rho - rho_bar)/eps| per cell.
std::vector<double> taylor_gap_field(const FieldState& s, const Params& p);

/// Spacetime L^1 norm of the gap field.
double taylor_consistency(const Trajectory& traj);

// --- Jensen ------------------------------------------------------------------

jensen::JensenReport jensen_necessary_check(const young::YoungMeasure& mu, const young::TestDictionary& dict,
                                            const jensen::JensenReportOptions& options = {});

// --- full report -------------------------------------------------------------

struct RunMetrics {
  double eps = 0.0;
  double concentration_norm = 0.0;
  double lift_sup = 0.0;
  double density_deviation_sup = 0.0;
  bool lift_cross_check = false;  // gamma = 2: lift_sup <= (2 rho_bar + dev) dev / (eps rho_bar)
  double incompressibility_residual = 0.0;
  double energy_excess = 0.0;
  bool energy_nonincreasing = false;
  double e_rel_final = 0.0;
  bool relative_energy_bound = false;
  double taylor_gap = 0.0;
  double augmented_residual = 0.0;
  double pressure_variance = 0.0;  // mean per-cell variance of P in the extracted measure
  long steps = 0;
};

struct LadderAnalysisOptions {
  int coarsen = 4;
  int measure_time_stride = 1;
  int jensen_time_stride = 8;
  double kappa = 10.0;
  bool run_jensen = true;
  bool run_cauchy = true;
  jensen::JensenReportOptions jensen;
};

struct MachRunReport {
  std::vector<RunMetrics> runs;
  RateFit concentration;
  LiftBound lift;
  std::vector<double> cauchy;
  bool jensen_evaluated = false;
  jensen::JensenReport jensen;
  std::uint64_t seed = 0;
};

MachRunReport analyze_ladder(const MachLadder& ladder, const std::vector<LadderRun>& runs,
                             const LadderAnalysisOptions& options = {});

nlohmann::json to_json(const MachRunReport& r, bool include_cells = false);

}  // namespace lowmach::limit

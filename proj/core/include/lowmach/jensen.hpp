#pragma once

// Jensen-type tests for measures on the relaxed state space: the exact
// di-atomic criterion, upper-bound estimators for the truncated quasiconvex
// envelope, and per-cell reports.

#include "lowmach/relaxed_operator.hpp"
#include "lowmach/young_measure.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lowmach::jensen {

using Fn = std::function<double(const Eigen::VectorXd&)>;

// ---------------------------------------------------------------------------
// Di-atomic criterion

enum class DiatomicStatus { violated, wave_cone_connected };

struct DiatomicCell {
  DiatomicStatus status = DiatomicStatus::wave_cone_connected;
  double du = 0.0;           // |u1 - u2|
  double dP = 0.0;           // |P1 - P2|
  double determinant = 0.0;  // -|u1 - u2|^2 (P1 - P2)
};

/// `cell` must hold exactly two atoms in lift_S coordinates (d = 2, rho-slot 1).
DiatomicCell diatomic_cell(const young::AtomicMeasure& cell, double tol);

struct DiatomicReport {
  std::vector<DiatomicCell> cells;
  long violated_cells = 0;
  double violated_fraction = 0.0;  // spacetime measure fraction
};

DiatomicReport diatomic_jensen_test(const young::YoungMeasure& lifted, double tol = 1e-8);

// ---------------------------------------------------------------------------
// Envelope estimators

/// A split direction: a unit vector in ker symbol(eta) for an integer frequency eta.
struct SplitDirection {
  Eigen::VectorXd v;
  std::vector<int> frequency;
};

/// Candidate directions at `z`: for each frequency (the d+1 axes plus
/// `random_frequencies` random integer frequencies with entries in [-2, 2]) the
/// most negatively curved kernel direction of f (finite-difference Hessian
/// with step `fd_step`) and one random kernel combination.
std::vector<SplitDirection> candidate_directions(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z,
                                                 double fd_step, int random_frequencies, std::uint64_t seed);

struct Laminate {
  struct Node {
    double weight = 1.0;
    Eigen::VectorXd point;
    // split data, empty for leaves
    int plus = -1;
    int minus = -1;
    double lambda = 0.5;      // weight fraction of the plus child
    double step = 0.0;        // plus child = point + step * v
    Eigen::VectorXd v;        // minus child = point - lambda/(1-lambda) * step * v
    std::vector<int> frequency;
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  std::vector<young::Atom> leaves() const;
  int depth() const;
};

struct PlaneWaveCertificate {
  std::vector<SplitDirection> directions;
  std::vector<double> coefficients;
  double beta = 0.0;  // 0: sine, infinity: square wave, otherwise tanh(beta sin)/tanh(beta)
  int quad_points = 32;
};

struct EnvelopeEstimate {
  double value = 0.0;
  double f_at_z = 0.0;
  double q_used = 0.0;
  std::string bound_kind = "upper";
  std::string method;
  Eigen::VectorXd z;
  Laminate laminate;               // method == "laminate"
  PlaneWaveCertificate planewave;  // method == "planewave"
};

struct LaminateOptions {
  int depth = 1;
  double q = 1.0;
  double h = 0.0;  // magnitude lattice spacing; 0 means q / 16
  int trials = 6;  // random integer frequencies besides the axes
  std::vector<double> lambdas{0.25, 0.5, 0.75};
  std::uint64_t seed = 0;
};

/// Splits are searched exhaustively over the first two levels (only the root
/// level when depth >= 3, greedy below). The returned certificate may be
/// shallower than `depth` when a shallower one is better.
EnvelopeEstimate envelope_upper_laminate(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z,
                                         const LaminateOptions& options);

struct PlaneWaveOptions {
  int modes = 1;
  double q = 1.0;
  double h = 0.0;        // coefficient lattice spacing; 0 means q / 16
  int quad_points = 32;  // midpoint nodes per phase variable
  int trials = 6;        // random integer frequencies; also caps direction pairs for modes = 2
  std::uint64_t seed = 0;
};

EnvelopeEstimate envelope_upper_planewave(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z,
                                          const PlaneWaveOptions& options);

/// Profile psi_beta(s) used by plane-wave certificates.
double planewave_profile(double s, double beta);

/// Re-evaluate a certificate by an independent quadrature of the realising
/// oscillation (nested step profiles for laminates, a finer shifted midpoint
/// rule for plane waves).
double reevaluate(const EnvelopeEstimate& estimate, const Fn& f);

nlohmann::json to_json(const EnvelopeEstimate& e);

// ---------------------------------------------------------------------------
// Segment convexity

struct SegmentJensenResult {
  bool holds = false;
  double combination = 0.0;  // lambda f(z1) + (1 - lambda) f(z2)
  double hull = 0.0;         // lower convex hull at the same point
};

SegmentJensenResult segment_convexity_jensen(const OperatorAE& op, const Fn& f, const Eigen::VectorXd& z1,
                                             const Eigen::VectorXd& z2, double lambda, int samples);

/// Lower convex hull of (s_i, g_i) evaluated at s (nodes sorted by s).
double lower_hull_value(const std::vector<double>& s, const std::vector<double>& g, double at);

// ---------------------------------------------------------------------------
// Reports

enum class CellStatus { violated, satisfied_certified, inconclusive };

std::string to_string(CellStatus s);

struct JensenCellStatus {
  long t = 0;
  long s = 0;
  CellStatus status = CellStatus::inconclusive;
  std::string branch;   // "diatomic", "atomic" or "estimator"
  std::string witness;  // test function name
  double gap = 0.0;     // <S#mu, f> - U_f for the witness
};

struct JensenReportOptions {
  double q = 0.0;  // 0 means 8 R per cell, R the lifted support radius
  double diatomic_tol = 1e-8;
  int laminate_depth = 1;
  int planewave_modes = 1;
  int quad_points = 32;
  int trials = 4;
  int time_stride = 1;
  std::uint64_t seed = 0;
};

struct JensenReport {
  std::vector<JensenCellStatus> cells;
  long violated = 0;
  long certified = 0;
  long inconclusive = 0;
  double violated_fraction = 0.0;
};

/// Dictionary over R^N: coordinates, pairwise products, |z|^2, and
/// z -> -|m - c|^2 (Q - |m|^2/d - p0), the (u, P) function -|u - c|^2 (P - p0)
/// written in relaxed coordinates.
young::TestDictionary default_dictionary(int d, const Eigen::VectorXd& c, double p0);

/// `mu` is a measure over (u, P); cells are lifted by lift_S before testing.
JensenReport jensen_report(const young::YoungMeasure& mu, const young::TestDictionary& dict,
                           const JensenReportOptions& options = {});

nlohmann::json to_json(const JensenReport& r);

}  // namespace lowmach::jensen

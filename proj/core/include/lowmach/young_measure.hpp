#pragma once

// Finitely supported (atomic) Young measures on spacetime grids.
//
// A YoungMeasure stores one AtomicMeasure per spacetime cell. Time is
// represented by sample nodes (usually solver snapshot times); integrals in
// time use the piecewise-linear reconstruction through those nodes. Space is
// the unit torus T^d split into n^d equal cells, indexed row-major.

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace lowmach::young {

inline constexpr double kMergeTolerance = 1e-12;

struct Atom {
  double weight = 1.0;
  Eigen::VectorXd point;
};

class AtomicMeasure {
 public:
  AtomicMeasure() = default;
  /// Validates weights (positive, summing to 1 within 1e-12) and dimensions;
  /// atoms closer than `merge_tol` (max-norm) are merged.
  explicit AtomicMeasure(std::vector<Atom> atoms, double merge_tol = kMergeTolerance);

  static AtomicMeasure dirac(const Eigen::VectorXd& point);
  /// Uniform weights over `points` (coincident points merge).
  static AtomicMeasure uniform(const std::vector<Eigen::VectorXd>& points);

  int dim() const { return dim_; }
  std::size_t size() const { return atoms_.size(); }
  const std::vector<Atom>& atoms() const { return atoms_; }
  Eigen::VectorXd barycenter() const;
  /// max_i |x_i|.
  double support_radius() const;

 private:
  int dim_ = 0;
  std::vector<Atom> atoms_;
};

/// A continuous test function R^m -> R with an L-infinity bound on a declared ball.
struct TestFunction {
  std::string name;
  int dim = -1;  // -1: any dimension
  std::function<double(const Eigen::VectorXd&)> eval;
  double bound = 0.0;
  double ball_radius = 0.0;
};

using Map = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

double pair(const AtomicMeasure& nu, const TestFunction& f);
double pair(const AtomicMeasure& nu, const std::function<double(const Eigen::VectorXd&)>& f);
AtomicMeasure pushforward(const AtomicMeasure& nu, const Map& g);

struct SpacetimeGrid {
  int d = 2;
  int n = 1;                  // spatial cells per axis
  double T = 1.0;
  std::vector<double> times;  // sample nodes, strictly increasing

  long cells_per_slice() const;
  long total_cells() const { return cells_per_slice() * static_cast<long>(times.size()); }
  /// Cell-centre coordinates of spatial cell `s`.
  Eigen::VectorXd cell_center(long s) const;
  double cell_volume() const;
  void validate() const;
  bool same_layout(const SpacetimeGrid& other) const;
};

class YoungMeasure {
 public:
  YoungMeasure() = default;
  YoungMeasure(SpacetimeGrid grid, int m, std::vector<AtomicMeasure> cells);

  const SpacetimeGrid& grid() const { return grid_; }
  int dim() const { return m_; }
  const std::vector<AtomicMeasure>& cells() const { return cells_; }
  const AtomicMeasure& cell(long t, long s) const { return cells_[static_cast<std::size_t>(t * grid_.cells_per_slice() + s)]; }

  /// Per-cell pairing <nu, f>, ordered like cells().
  std::vector<double> pairing_field(const std::function<double(const Eigen::VectorXd&)>& f) const;

 private:
  SpacetimeGrid grid_;
  int m_ = 0;
  std::vector<AtomicMeasure> cells_;
};

/// Cellwise pushforward under the coordinate projection (u, P) -> u.
YoungMeasure project_u(const YoungMeasure& mu);

/// nu (x) delta_{P(cell)}; `pressure` is indexed like the cells.
YoungMeasure extend_with_pressure(const YoungMeasure& nu, const std::vector<double>& pressure);

/// Apply a pointwise map to every cell.
YoungMeasure pushforward(const YoungMeasure& mu, const Map& g, int image_dim);

/// Average-free P with -Laplace P = div div S on the periodic n^d grid of the
/// unit torus, computed spectrally. `second_moment` holds a full d x d matrix
/// per grid point (point-major, row-major within the matrix).
std::vector<double> pressure_from_velocity(int n, int d, const std::vector<double>& second_moment);

/// Spectral div div S, the right-hand side of the pressure equation.
std::vector<double> spectral_div_div(int n, int d, const std::vector<double>& second_moment);

/// Spectral -Laplace of a scalar field.
std::vector<double> spectral_neg_laplacian(int n, int d, const std::vector<double>& field);

struct TestDictionary {
  std::vector<TestFunction> entries;

  /// Monomials of total degree <= `degree` in m variables, multiplied by the
  /// compactly supported cutoff (1 - |z|^2/R^2)^3_+.
  static TestDictionary monomials(int m, int degree, double radius);
};

struct WindowOptions {
  int kmax = 4;
  /// Time factors: the constant 1 and the C^1 bump vanishing at t = T.
  bool constant_time_factor = true;
  bool bump_time_factor = true;
};

/// max over dictionary entries f and windows phi of
/// |int int phi (<nu1, f> - <nu2, f>) dx dt|.
double ym_distance(const YoungMeasure& nu1, const YoungMeasure& nu2, const TestDictionary& dict,
                   const WindowOptions& options = {});

/// Values on a fine spacetime grid: values[(t * n^d + s) * m + c].
struct SampledField {
  SpacetimeGrid grid;
  int m = 1;
  std::vector<double> values;
};

/// Coarsen a sampled field spatially by `coarsen` per axis; each coarse cell
/// carries the uniform measure over the fine samples it contains.
YoungMeasure empirical_from_field(const SampledField& field, int coarsen);

nlohmann::json to_json(const YoungMeasure& mu);
YoungMeasure young_measure_from_json(const nlohmann::json& doc);

}  // namespace lowmach::young

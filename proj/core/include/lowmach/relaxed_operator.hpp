#pragma once

// The first-order operator of the relaxed Euler system
//   d_t m + div M + grad Q = 0,   d_t rho + div m = 0
// acting on z = (rho, m, M, Q). Frequencies are eta = (tau, xi) in R^{1+d};
// symbol rows are the d momentum rows followed by the continuity row.

#include "lowmach/state_space.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace lowmach {

inline constexpr double kRankThreshold = 1e-10;

class OperatorAE {
 public:
  explicit OperatorAE(int d);

  int d() const { return d_; }
  int N() const { return relaxed_dim(d_); }
  int rows() const { return d_ + 1; }

  /// A^0 (time) for l = 0, A^l (space) for l = 1..d; each (d+1) x N.
  const Eigen::MatrixXd& coefficient(int l) const { return A_[static_cast<std::size_t>(l)]; }

  /// tau A^0 + sum_l xi_l A^l.
  Eigen::MatrixXd symbol(const Eigen::VectorXd& eta) const;

  /// L_z with columns A^l z, so that L_z eta = symbol(eta) z.
  Eigen::MatrixXd contraction(const Eigen::VectorXd& z) const;

  /// Orthonormal basis (columns) of ker symbol(eta), from the SVD.
  Eigen::MatrixXd kernel(const Eigen::VectorXd& eta) const;

  int rank(const Eigen::VectorXd& eta) const;

 private:
  int d_;
  std::vector<Eigen::MatrixXd> A_;
};

struct FrequencySymbol {
  Eigen::VectorXd eta;
  Eigen::MatrixXd matrix;
};

FrequencySymbol symbol(const OperatorAE& op, const Eigen::VectorXd& eta);

struct ConstantRankResult {
  bool constant = false;
  int rank = 0;
  int min_rank = 0;
  int max_rank = 0;
  long samples = 0;
};

/// Rank of the symbol at `samples` random unit frequencies (Gaussian
/// directions normalised), optionally scaled by `scale`.
ConstantRankResult constant_rank_check(const OperatorAE& op, long samples, std::uint64_t seed = 0, double scale = 1.0);

struct WaveConeOptions {
  double tol = 1e-8;          // relative to |z|
  int sweep_per_angle = 64;   // sweep covers at least sweep_per_angle^(d+1) points of S^d
  int refine_steps = 50;      // Nelder-Mead iterations
  int polish_steps = 8;       // inverse-iteration steps on L_z^T L_z
};

struct WaveConeReport {
  bool member = false;
  Eigen::VectorXd best_direction;
  double min_singular_value = 0.0;  // min over |eta| = 1 of |symbol(eta) z|
  double tolerance = 0.0;           // absolute threshold tol * |z|
  double sweep_minimum = 0.0;       // before refinement
};

WaveConeReport wave_cone_membership(const OperatorAE& op, const RelaxedState& z, const WaveConeOptions& options = {});

nlohmann::json to_json(const WaveConeReport& r);

struct DiatomicDeterminant {
  Eigen::Matrix3d contraction;  // columns A^0 dz, A^1 dz, A^2 dz
  double determinant = 0.0;     // cofactor expansion of `contraction`
  double closed_form = 0.0;     // -|u1 - u2|^2 (P1 - P2)
  /// eta -> symbol(eta)(z1 - z2), linear in eta.
  Eigen::Vector3d apply(const Eigen::Vector3d& eta) const { return contraction * eta; }
};

/// d = 2 only; both states must carry the same rho-slot (1 for lifted states).
DiatomicDeterminant diatomic_det(const RelaxedState& z1, const RelaxedState& z2);

/// Relaxed-state samples on a regular spacetime grid: nt time samples at
/// t_j = j T / nt (periodic in time, or made so by a window) and n^d cells of
/// the unit torus at cell centres. values[(j * n^d + s) * N + c].
struct RelaxedField {
  int d = 2;
  int nt = 8;
  int n = 8;
  double T = 1.0;
  std::vector<double> values;

  long spatial_points() const;
  long total_points() const { return spatial_points() * nt; }
};

enum class TimeWindow { none, raised_cosine };

/// sqrt(T |T^d| sum_{k != 0} |symbol(eta_k) zhat_k|^2 / |eta_k|^2) with
/// eta_k = (2 pi k_t / T, 2 pi k_x) and zhat the normalised DFT coefficients.
double ae_residual_negative_norm(const OperatorAE& op, const RelaxedField& field, TimeWindow window = TimeWindow::none,
                                 double window_margin = 0.1);

/// Physical frequency (k_t / T, k_x) associated with an integer spacetime frequency.
Eigen::VectorXd integer_frequency(const std::vector<int>& k, double T);

/// z(t, x) = amp * profile(k_t t / T + k_x . x); amp must lie in
/// ker symbol(integer_frequency(k, T)).
RelaxedField plane_wave_field(const OperatorAE& op, const std::vector<int>& k, const Eigen::VectorXd& amp,
                              const std::function<double(double)>& profile, int nt, int n, double T);

}  // namespace lowmach

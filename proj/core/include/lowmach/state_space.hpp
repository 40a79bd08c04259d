#pragma once

// Fluid state types, physical parameters and the lifting maps that embed
// compressible and incompressible states into the state space of the relaxed
// Euler system.
//
// Relaxed-state component layout (frozen, used by every matrix in the repo):
//   z = (rho, m_1..m_d, M-components, Q)
// where the M-components are the row-major upper triangle of the symmetric
// trace-free matrix M with the last diagonal entry M_dd dropped
// (M_dd = -(M_11 + ... + M_{d-1,d-1})).

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace lowmach {

struct Params {
  int d = 2;              // spatial dimension
  double gamma = 2.0;     // adiabatic exponent
  double eps = 1.0;       // squared Mach number
  double rho_bar = 1.0;   // reference density
  double T = 1.0;         // final time

  void validate() const;

  /// gamma = 1 + 2/d.
  static Params monoatomic(int d, double eps, double rho_bar = 1.0, double T = 1.0);
};

/// Number of independent components of a trace-free symmetric d x d matrix.
constexpr int sym0_dim(int d) { return d * (d + 1) / 2 - 1; }

/// Dimension N of the relaxed state space.
constexpr int relaxed_dim(int d) { return 1 + d + sym0_dim(d) + 1; }

/// (row, col) of each stored trace-free component, in storage order.
std::vector<std::pair<int, int>> sym0_layout(int d);

class TraceFreeSym {
 public:
  explicit TraceFreeSym(int d);
  TraceFreeSym(int d, Eigen::VectorXd components);

  /// Requires a symmetric, trace-free input (to 1e-12 relative).
  static TraceFreeSym from_matrix(const Eigen::MatrixXd& m);

  int d() const { return d_; }
  const Eigen::VectorXd& components() const { return c_; }
  Eigen::MatrixXd matrix() const;
  double operator()(int i, int j) const;

 private:
  int d_;
  Eigen::VectorXd c_;
};

struct CompressibleState {
  double rho = 1.0;
  Eigen::VectorXd u;
};

struct AugmentedState {
  Eigen::VectorXd u;
  double P = 0.0;
};

class RelaxedState {
 public:
  explicit RelaxedState(int d);
  RelaxedState(int d, Eigen::VectorXd z);
  RelaxedState(double rho, const Eigen::VectorXd& m, const TraceFreeSym& M, double Q);

  int d() const { return d_; }
  int N() const { return static_cast<int>(z_.size()); }
  const Eigen::VectorXd& vector() const { return z_; }

  double rho() const { return z_(0); }
  Eigen::VectorXd m() const { return z_.segment(1, d_); }
  TraceFreeSym M() const { return TraceFreeSym(d_, z_.segment(1 + d_, sym0_dim(d_))); }
  double Q() const { return z_(N() - 1); }

  RelaxedState operator-(const RelaxedState& other) const;
  RelaxedState operator+(const RelaxedState& other) const;
  RelaxedState operator*(double s) const;

 private:
  int d_;
  Eigen::VectorXd z_;
};

/// Output of the T-lift: (rho, u, scaled pressure).
struct PressureLiftTriple {
  double rho = 0.0;
  Eigen::VectorXd u;
  double p = 0.0;
};

/// v (.) v = v (x) v - |v|^2/d I.
TraceFreeSym ocircle(const Eigen::VectorXd& v, int d);

RelaxedState lift_S(const AugmentedState& s);
RelaxedState lift_Theta(const CompressibleState& s, const Params& p);
RelaxedState lift_C(const CompressibleState& s, const Params& p);
PressureLiftTriple lift_T(const CompressibleState& s, const Params& p);
AugmentedState lift_P(const CompressibleState& s, const Params& p);

/// Inverse of lift_S on its image: (u, P) = (m, Q - |m|^2/d).
AugmentedState unlift_S(const RelaxedState& z);

/// rho^gamma - rho_bar^gamma without cancellation near rho = rho_bar.
double pow_difference(double rho, double rho_bar, double gamma);

/// rho^gamma - rho_bar^gamma - gamma rho_bar^(gamma-1) (rho - rho_bar),
/// accurate to a few ulps relative even when rho is very close to rho_bar.
double taylor_remainder(double rho, double rho_bar, double gamma);

/// The scalar pressure lift (rho^gamma - rho_bar^gamma) / (eps rho_bar).
double pressure_lift(double rho, const Params& p);

}  // namespace lowmach

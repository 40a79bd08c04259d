#pragma once

// Test-side reference computations. None of these call into the library
// routine they are used to check.

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace oracle {

/// Relaxed vector (rho, m, M upper triangle without M_dd, Q) assembled by hand.
Eigen::VectorXd relaxed_vector(int d, double rho, const Eigen::VectorXd& m, const Eigen::MatrixXd& M, double Q);

/// (1, u, u (x) u - |u|^2/d I, P + |u|^2/d) in the relaxed layout.
Eigen::VectorXd lift_S(const Eigen::VectorXd& u, double P);

/// (tau m + (M + Q I) xi, tau rho + xi . m) evaluated componentwise from z.
Eigen::VectorXd apply_symbol(int d, const Eigen::VectorXd& eta, const Eigen::VectorXd& z);

/// 3 x 3 determinant by the Leibniz permutation sum.
double leibniz_det(const Eigen::Matrix3d& a);

/// Columns (A^0 dz, A^1 dz, A^2 dz) for dz = lift_S(u1, P1) - lift_S(u2, P2), d = 2.
Eigen::Matrix3d diatomic_matrix(const Eigen::Vector2d& u1, double P1, const Eigen::Vector2d& u2, double P2);

/// Zero-mean pressure of the steady vortex U = 2 pi A (-sin 2pi x cos 2pi y, cos 2pi x sin 2pi y).
double vortex_pressure(double A, double x, double y);

/// Lower convex envelope at `at` by minimising over every bracketing chord.
double lower_hull_brute(const std::vector<double>& s, const std::vector<double>& g, double at);

/// Negative-norm residual by a direct O(M^2) DFT on the (nt, n^d) grid using apply_symbol.
double direct_negative_norm(int d, int nt, int n, double T, const std::vector<double>& values);

/// Samples of a * sin(2 pi (k_t t / T + k_x . x)) at t_j = j T / nt and cell centres,
/// laid out as values[(j * n^d + s) * N + c] with s row-major.
std::vector<double> sine_mode_field(const std::vector<int>& k, const Eigen::VectorXd& a, int nt, int n);

/// gamma = 2: (rho^2 - rho_bar^2)/(eps rho_bar) - 2 (rho - rho_bar)/eps.
double taylor_gap_gamma2(double rho, double rho_bar, double eps);

/// Least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Composite Simpson integral on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b, int panels);

}  // namespace oracle

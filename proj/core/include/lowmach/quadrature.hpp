#pragma once

// Time profiles, spatial trigonometric test modes and the quadrature rules
// shared by the weak-residual and Young-measure diagnostics.

#include <functional>
#include <vector>

namespace lowmach::quad {

/// C^1 time bump supported in [0, T): b(t) = cos^2(pi t / (2T)) on [0, T],
/// b(0) = 1, b(T) = b'(T) = 0.
struct TimeBump {
  double T = 1.0;
  double value(double t) const;
  double derivative(double t) const;
};

/// C^1 window vanishing at t = 0 and t = T: raised-cosine ramps over the
/// first and last `margin` fraction of the interval, 1 in between.
struct RaisedCosineWindow {
  double T = 1.0;
  double margin = 0.1;
  double value(double t) const;
};

/// Weights W_j = \int profile(t) hat_j(t) dt for the piecewise-linear
/// interpolant through `times`, integrated with 8-point Gauss-Legendre per
/// interval. For a single node the data is taken constant on [0, T_single].
/// Sum_j W_j g_j is then the exact integral of profile * (linear interpolant of g)
/// up to Gauss-Legendre error.
std::vector<double> hat_weights(const std::vector<double>& times, const std::function<double(double)>& profile,
                                double T_single = 1.0);

/// Trapezoid weights for `times` (single node: weight T_single).
std::vector<double> trapezoid_weights(const std::vector<double>& times, double T_single = 1.0);

/// A real trigonometric mode on the unit torus: cos(2 pi k.x) or sin(2 pi k.x).
struct TrigMode {
  std::vector<int> k;
  bool sine = false;

  double value(const double* x) const;
  /// d/dx_a of the mode.
  double gradient(const double* x, int a) const;
};

/// All modes with |k_a| <= kmax on every axis, one representative per +-k
/// pair, both cos and sin for k != 0, plus the constant mode.
std::vector<TrigMode> trig_family(int d, int kmax);

}  // namespace lowmach::quad

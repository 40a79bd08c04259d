#include "lowmach/state_space.hpp"

#include "lowmach/error.hpp"

#include <cmath>
#include <string>

namespace lowmach {

void Params::validate() const {
  require(d >= 2, "spatial dimension must be at least 2", "d");
  require(std::isfinite(gamma) && gamma > 1.0, "gamma must exceed 1", "gamma");
  require(std::isfinite(eps) && eps > 0.0, "eps must be positive", "eps");
  require(std::isfinite(rho_bar) && rho_bar > 0.0, "rho_bar must be positive", "rho_bar");
  require(std::isfinite(T) && T > 0.0, "T must be positive", "T");
}

Params Params::monoatomic(int d, double eps, double rho_bar, double T) {
  Params p;
  p.d = d;
  p.gamma = 1.0 + 2.0 / d;
  p.eps = eps;
  p.rho_bar = rho_bar;
  p.T = T;
  p.validate();
  return p;
}

std::vector<std::pair<int, int>> sym0_layout(int d) {
  std::vector<std::pair<int, int>> out;
  out.reserve(static_cast<std::size_t>(sym0_dim(d)));
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j)
      if (!(i == d - 1 && j == d - 1)) out.emplace_back(i, j);
  return out;
}

// ---------------------------------------------------------------------------

TraceFreeSym::TraceFreeSym(int d) : d_(d), c_(Eigen::VectorXd::Zero(sym0_dim(d))) {
  require(d >= 2, "trace-free matrices need d >= 2", "d");
}

TraceFreeSym::TraceFreeSym(int d, Eigen::VectorXd components) : d_(d), c_(std::move(components)) {
  require(d >= 2, "trace-free matrices need d >= 2", "d");
  require(c_.size() == sym0_dim(d), "wrong number of trace-free components", "M");
}

TraceFreeSym TraceFreeSym::from_matrix(const Eigen::MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  require(m.cols() == d, "matrix must be square", "M");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  require((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "matrix must be symmetric", "M");
  require(std::abs(m.trace()) <= 1e-12 * scale * d, "matrix must be trace-free", "M");
  TraceFreeSym out(d);
  const auto layout = sym0_layout(d);
  for (std::size_t k = 0; k < layout.size(); ++k) out.c_(static_cast<Eigen::Index>(k)) = m(layout[k].first, layout[k].second);
  return out;
}

double TraceFreeSym::operator()(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i == d_ - 1 && j == d_ - 1) {
    double tr = 0.0;
    for (int k = 0; k < d_ - 1; ++k) tr += (*this)(k, k);
    return -tr;
  }
  // offset of row i in the row-major upper triangle
  const int row_start = i * d_ - i * (i - 1) / 2;
  return c_(row_start + (j - i));
}

Eigen::MatrixXd TraceFreeSym::matrix() const {
  Eigen::MatrixXd m(d_, d_);
  for (int i = 0; i < d_; ++i)
    for (int j = 0; j < d_; ++j) m(i, j) = (*this)(i, j);
  return m;
}

// ---------------------------------------------------------------------------

RelaxedState::RelaxedState(int d) : d_(d), z_(Eigen::VectorXd::Zero(relaxed_dim(d))) {
  require(d >= 2, "relaxed states need d >= 2", "d");
}

RelaxedState::RelaxedState(int d, Eigen::VectorXd z) : d_(d), z_(std::move(z)) {
  require(d >= 2, "relaxed states need d >= 2", "d");
  require(z_.size() == relaxed_dim(d), "relaxed state has wrong dimension", "z");
}

RelaxedState::RelaxedState(double rho, const Eigen::VectorXd& m, const TraceFreeSym& M, double Q)
    : d_(M.d()), z_(relaxed_dim(M.d())) {
  require(m.size() == d_, "momentum dimension does not match M", "m");
  z_(0) = rho;
  z_.segment(1, d_) = m;
  z_.segment(1 + d_, sym0_dim(d_)) = M.components();
  z_(z_.size() - 1) = Q;
}

RelaxedState RelaxedState::operator-(const RelaxedState& other) const {
  require(other.d_ == d_, "dimension mismatch", "z");
  return RelaxedState(d_, z_ - other.z_);
}

RelaxedState RelaxedState::operator+(const RelaxedState& other) const {
  require(other.d_ == d_, "dimension mismatch", "z");
  return RelaxedState(d_, z_ + other.z_);
}

RelaxedState RelaxedState::operator*(double s) const { return RelaxedState(d_, s * z_); }

// ---------------------------------------------------------------------------

TraceFreeSym ocircle(const Eigen::VectorXd& v, int d) {
  require(d >= 2, "ocircle needs d >= 2", "d");
  require(v.size() == d, "vector dimension " + std::to_string(v.size()) + " does not match d = " + std::to_string(d),
          "v");
  TraceFreeSym out(d);
  Eigen::VectorXd c(sym0_dim(d));
  const double trace_part = v.squaredNorm() / d;
  const auto layout = sym0_layout(d);
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const auto [i, j] = layout[k];
    c(static_cast<Eigen::Index>(k)) = v(i) * v(j) - (i == j ? trace_part : 0.0);
  }
  return TraceFreeSym(d, std::move(c));
}

namespace {

void check_compressible(const CompressibleState& s, const Params& p) {
  p.validate();
  require(s.u.size() == p.d, "velocity dimension does not match d", "u");
  require(std::isfinite(s.rho) && s.rho > 0.0, "density must be positive", "rho");
}

}  // namespace

RelaxedState lift_S(const AugmentedState& s) {
  const int d = static_cast<int>(s.u.size());
  require(d >= 2, "lift_S needs d >= 2", "u");
  return RelaxedState(1.0, s.u, ocircle(s.u, d), s.P + s.u.squaredNorm() / d);
}

RelaxedState lift_Theta(const CompressibleState& s, const Params& p) {
  check_compressible(s, p);
  const int d = p.d;
  TraceFreeSym M(d, s.rho * ocircle(s.u, d).components());
  const double Q = std::pow(s.rho, p.gamma) / p.eps + s.rho * s.u.squaredNorm() / d;
  return RelaxedState(s.rho, s.rho * s.u, M, Q);
}

RelaxedState lift_C(const CompressibleState& s, const Params& p) {
  check_compressible(s, p);
  const int d = p.d;
  TraceFreeSym M(d, s.rho * ocircle(s.u, d).components());
  const double Q = pow_difference(s.rho, p.rho_bar, p.gamma) / p.eps + s.rho * s.u.squaredNorm() / d;
  return RelaxedState(s.rho, s.rho * s.u, M, Q);
}

PressureLiftTriple lift_T(const CompressibleState& s, const Params& p) {
  check_compressible(s, p);
  return {s.rho, s.u, pressure_lift(s.rho, p)};
}

AugmentedState lift_P(const CompressibleState& s, const Params& p) {
  check_compressible(s, p);
  return {s.u, pressure_lift(s.rho, p)};
}

AugmentedState unlift_S(const RelaxedState& z) {
  const Eigen::VectorXd m = z.m();
  return {m, z.Q() - m.squaredNorm() / z.d()};
}

double pow_difference(double rho, double rho_bar, double gamma) {
  const double x = (rho - rho_bar) / rho_bar;
  return std::pow(rho_bar, gamma) * std::expm1(gamma * std::log1p(x));
}

double taylor_remainder(double rho, double rho_bar, double gamma) {
  const double x = (rho - rho_bar) / rho_bar;
  double bracket = 0.0;
  if (std::abs(x) < 0.25) {
    // binomial series of (1+x)^gamma - 1 - gamma x, terminating for integer gamma
    double coeff = gamma * (gamma - 1.0) / 2.0;
    double power = x * x;
    for (int k = 2; k < 400; ++k) {
      const double term = coeff * power;
      bracket += term;
      if (term == 0.0 || std::abs(term) <= 1e-18 * std::abs(bracket)) break;
      coeff *= (gamma - k) / (k + 1.0);
      power *= x;
    }
  } else {
    bracket = std::pow(1.0 + x, gamma) - 1.0 - gamma * x;
  }
  return std::pow(rho_bar, gamma) * bracket;
}

double pressure_lift(double rho, const Params& p) {
  return pow_difference(rho, p.rho_bar, p.gamma) / (p.eps * p.rho_bar);
}

}  // namespace lowmach

#include "lowmach/quadrature.hpp"

#include "lowmach/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>

namespace lowmach::quad {

using std::numbers::pi;

double TimeBump::value(double t) const {
  if (t >= T) return 0.0;
  const double c = std::cos(pi * t / (2.0 * T));
  return c * c;
}

double TimeBump::derivative(double t) const {
  if (t >= T) return 0.0;
  return -(pi / (2.0 * T)) * std::sin(pi * t / T);
}

double RaisedCosineWindow::value(double t) const {
  const double ramp = margin * T;
  if (t <= 0.0 || t >= T) return 0.0;
  if (t < ramp) return 0.5 * (1.0 - std::cos(pi * t / ramp));
  if (t > T - ramp) return 0.5 * (1.0 - std::cos(pi * (T - t) / ramp));
  return 1.0;
}

std::vector<double> hat_weights(const std::vector<double>& times, const std::function<double(double)>& profile,
                                double T_single) {
  require(!times.empty(), "need at least one time node", "times");
  if (times.size() == 1) {
    using GL = boost::math::quadrature::gauss<double, 8>;
    const double integral = GL::integrate(profile, 0.0, T_single);
    return {integral};
  }
  std::vector<double> w(times.size(), 0.0);
  using GL = boost::math::quadrature::gauss<double, 8>;
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double a = times[j];
    const double b = times[j + 1];
    require(b > a, "time nodes must be strictly increasing", "times");
    const double len = b - a;
    w[j] += GL::integrate([&](double t) { return profile(t) * (b - t) / len; }, a, b);
    w[j + 1] += GL::integrate([&](double t) { return profile(t) * (t - a) / len; }, a, b);
  }
  return w;
}

std::vector<double> trapezoid_weights(const std::vector<double>& times, double T_single) {
  require(!times.empty(), "need at least one time node", "times");
  if (times.size() == 1) return {T_single};
  std::vector<double> w(times.size(), 0.0);
  for (std::size_t j = 0; j + 1 < times.size(); ++j) {
    const double h = times[j + 1] - times[j];
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

double TrigMode::value(const double* x) const {
  double phase = 0.0;
  for (std::size_t a = 0; a < k.size(); ++a) phase += k[a] * x[a];
  phase *= 2.0 * pi;
  return sine ? std::sin(phase) : std::cos(phase);
}

double TrigMode::gradient(const double* x, int a) const {
  double phase = 0.0;
  for (std::size_t b = 0; b < k.size(); ++b) phase += k[b] * x[b];
  phase *= 2.0 * pi;
  const double factor = 2.0 * pi * k[static_cast<std::size_t>(a)];
  return sine ? factor * std::cos(phase) : -factor * std::sin(phase);
}

std::vector<TrigMode> trig_family(int d, int kmax) {
  require(d >= 1 && kmax >= 0, "invalid trigonometric family", "kmax");
  std::vector<TrigMode> out;
  out.push_back({std::vector<int>(static_cast<std::size_t>(d), 0), false});
  const int side = 2 * kmax + 1;
  long total = 1;
  for (int a = 0; a < d; ++a) total *= side;
  std::vector<int> k(static_cast<std::size_t>(d));
  for (long flat = 0; flat < total; ++flat) {
    long rest = flat;
    for (int a = d - 1; a >= 0; --a) {
      k[static_cast<std::size_t>(a)] = static_cast<int>(rest % side) - kmax;
      rest /= side;
    }
    // canonical representative: first nonzero component positive
    int first = 0;
    for (int v : k)
      if (v != 0) {
        first = v;
        break;
      }
    if (first <= 0) continue;
    out.push_back({k, false});
    out.push_back({k, true});
  }
  return out;
}

}  // namespace lowmach::quad

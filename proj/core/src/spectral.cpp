#include "lowmach/spectral.hpp"

#include "lowmach/error.hpp"

#include <fftw3.h>

#include <mutex>

namespace lowmach::spectral {

namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

long total_size(const std::vector<int>& dims) {
  long n = 1;
  for (int d : dims) {
    require(d > 0, "FFT axis length must be positive", "dims");
    n *= d;
  }
  return n;
}

std::vector<cplx> transform(const std::vector<int>& dims, const std::vector<cplx>& in, int sign) {
  const long n = total_size(dims);
  require(static_cast<long>(in.size()) == n, "FFT input size does not match shape", "data");
  std::vector<cplx> out(in.size());
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  auto* dst = reinterpret_cast<fftw_complex*>(out.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft(static_cast<int>(dims.size()), dims.data(), src, dst, sign,
                         FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

}  // namespace

std::vector<cplx> forward(const std::vector<int>& dims, const std::vector<cplx>& data) {
  auto out = transform(dims, data, FFTW_FORWARD);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<cplx> inverse(const std::vector<int>& dims, const std::vector<cplx>& coeffs) {
  return transform(dims, coeffs, FFTW_BACKWARD);
}

std::vector<cplx> forward_real(const std::vector<int>& dims, const std::vector<double>& data) {
  std::vector<cplx> c(data.begin(), data.end());
  return forward(dims, c);
}

void unravel(long flat, const std::vector<int>& dims, std::vector<int>& index) {
  index.resize(dims.size());
  for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
    index[static_cast<std::size_t>(a)] = static_cast<int>(flat % dims[static_cast<std::size_t>(a)]);
    flat /= dims[static_cast<std::size_t>(a)];
  }
}

}  // namespace lowmach::spectral

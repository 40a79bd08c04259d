#pragma once

// Thin FFT layer over FFTW for periodic tensor-product grids.

#include <complex>
#include <vector>

namespace lowmach::spectral {

using cplx = std::complex<double>;

/// Signed wavenumber of FFT index `i` on an axis with `n` points
/// (0, 1, ..., n/2, -(n/2 - 1), ..., -1 for even n).
inline int signed_wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

/// Forward multidimensional DFT of row-major complex data with shape `dims`,
/// normalised by 1/size so the output holds Fourier coefficients.
std::vector<cplx> forward(const std::vector<int>& dims, const std::vector<cplx>& data);

/// Inverse of `forward` (no extra normalisation).
std::vector<cplx> inverse(const std::vector<int>& dims, const std::vector<cplx>& coeffs);

/// Convenience: forward transform of real data.
std::vector<cplx> forward_real(const std::vector<int>& dims, const std::vector<double>& data);

/// Row-major multi-index decomposition.
void unravel(long flat, const std::vector<int>& dims, std::vector<int>& index);

}  // namespace lowmach::spectral

#pragma once

#include <complex>
#include <vector>

namespace qrf {

// Unitary centered DFT on n points with sites k - n/2:
//   out_j = n^{-1/2} sum_k in_k exp(-2 pi i (j - n/2)(k - n/2) / n)   (forward)
// and its inverse. n must be even.
void centered_dft(std::vector<std::complex<double>>& v, bool forward);

// Trigonometric (band-limited) interpolant of periodic samples v_k at
// fractional index positions s (same sample spacing, period n).
std::vector<std::complex<double>> bandlimited_resample(const std::vector<std::complex<double>>& v,
                                                       const std::vector<double>& s);

}  // namespace qrf

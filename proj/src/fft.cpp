#include "qrf/fft.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace qrf {

using cplx = std::complex<double>;

void centered_dft(std::vector<cplx>& v, bool forward) {
  const std::size_t n = v.size();
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("centered_dft: n must be even and positive");
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  const double scale = ((n / 2) % 2 == 0 ? 1.0 : -1.0) / std::sqrt(static_cast<double>(n));
  thread_local std::vector<cplx> in, out;
  in.resize(n);
  out.resize(n);
  for (std::size_t k = 0; k < n; ++k) in[k] = (k % 2 == 0) ? v[k] : -v[k];
  if (forward)
    fft.fwd(out, in);
  else
    fft.inv(out, in);
  for (std::size_t j = 0; j < n; ++j) v[j] = ((j % 2 == 0) ? scale : -scale) * out[j];
}

std::vector<cplx> bandlimited_resample(const std::vector<cplx>& v, const std::vector<double>& s) {
  const std::size_t n = v.size();
  if (n == 0 || n % 2 != 0) throw std::invalid_argument("bandlimited_resample: n must be even");
  thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  std::vector<cplx> coef(n);
  std::vector<cplx> in(v);
  fft.fwd(coef, in);
  const double inv_n = 1.0 / static_cast<double>(n);
  const long half = static_cast<long>(n / 2);
  std::vector<cplx> out(s.size());
  for (std::size_t m = 0; m < s.size(); ++m) {
    cplx acc = 0.0;
    const double base = 2.0 * std::numbers::pi * s[m] * inv_n;
    for (long j = 0; j < static_cast<long>(n); ++j) {
      const long freq = j < half ? j : j - static_cast<long>(n);
      if (j == half) {
        // Nyquist term split symmetrically to keep real data real
        acc += coef[j] * std::cos(base * static_cast<double>(half));
      } else {
        acc += coef[j] * std::polar(1.0, base * static_cast<double>(freq));
      }
    }
    out[m] = acc * inv_n;
  }
  return out;
}

}  // namespace qrf

#include "qrf/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qrf {

Potential Potential::zero() { return Potential(); }

Potential Potential::linear(double slope, double offset) {
  Potential p;
  p.kind_ = Kind::Linear;
  p.name_ = "linear";
  p.slopes_ = {slope};
  p.offset_ = offset;
  return p;
}

Potential Potential::piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes, double offset) {
  if (slopes.size() != breakpoints.size() + 1)
    throw std::invalid_argument("piecewise-linear potential needs one more slope than breakpoints");
  if (!std::is_sorted(breakpoints.begin(), breakpoints.end()) ||
      std::adjacent_find(breakpoints.begin(), breakpoints.end()) != breakpoints.end())
    throw std::invalid_argument("breakpoints must be strictly increasing");
  Potential p;
  p.kind_ = breakpoints.empty() ? Kind::Linear : Kind::PiecewiseLinear;
  p.name_ = "piecewise-linear";
  p.breaks_ = std::move(breakpoints);
  p.slopes_ = std::move(slopes);
  p.offset_ = offset;
  return p;
}

Potential Potential::general(std::function<double(double)> v, std::function<double(double)> dv,
                             std::function<double(double)> d2v, std::string name) {
  if (!v || !dv || !d2v) throw std::invalid_argument("general potential needs V, V' and V''");
  Potential p;
  p.kind_ = Kind::General;
  p.name_ = std::move(name);
  p.v_ = std::move(v);
  p.dv_ = std::move(dv);
  p.d2v_ = std::move(d2v);
  return p;
}

Potential Potential::quartic(double k) {
  return general([k](double x) { return 0.25 * k * x * x * x * x; }, [k](double x) { return k * x * x * x; },
                 [k](double x) { return 3.0 * k * x * x; }, "quartic");
}

int Potential::region(double x) const {
  if (kind_ == Kind::General) return 0;
  // breakpoint itself belongs to the region on its left
  return static_cast<int>(std::lower_bound(breaks_.begin(), breaks_.end(), x) - breaks_.begin());
}

int Potential::region_count() const { return kind_ == Kind::General ? 1 : static_cast<int>(slopes_.size()); }

std::pair<double, double> Potential::region_bounds(int r) const {
  const double inf = std::numeric_limits<double>::infinity();
  if (r < 0 || r >= region_count()) throw std::out_of_range("region index");
  if (kind_ == Kind::General) return {-inf, inf};
  const double lo = r == 0 ? -inf : breaks_[r - 1];
  const double hi = r == static_cast<int>(breaks_.size()) ? inf : breaks_[r];
  return {lo, hi};
}

double Potential::region_slope(int r) const {
  if (kind_ == Kind::General) throw std::logic_error("general potential has no constant slope");
  return slopes_.at(r);
}

double Potential::derivative(double x) const {
  if (kind_ == Kind::General) return dv_(x);
  return slopes_[region(x)];
}

double Potential::second_derivative(double x) const {
  if (kind_ == Kind::General) return d2v_(x);
  return 0.0;
}

double Potential::value(double x) const {
  if (kind_ == Kind::General) return v_(x);
  // integrate the slope from 0 to x
  double acc = offset_;
  double pos = 0.0;
  const double dir = x >= 0.0 ? 1.0 : -1.0;
  while ((x - pos) * dir > 0.0) {
    const int r = dir > 0 ? static_cast<int>(std::upper_bound(breaks_.begin(), breaks_.end(), pos) - breaks_.begin())
                          : region(pos);
    const auto [lo, hi] = region_bounds(r);
    const double next = dir > 0 ? std::min(x, hi) : std::max(x, lo);
    acc += slopes_[r] * (next - pos);
    pos = next;
  }
  return acc;
}

}  // namespace qrf

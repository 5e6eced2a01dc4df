#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace qrf {

// External potential V(x) for the frame particle. Piecewise-linear potentials are
// continuous, with V(0) = offset; at a breakpoint the left slope applies.
class Potential {
 public:
  enum class Kind { Zero, Linear, PiecewiseLinear, General };

  static Potential zero();
  static Potential linear(double slope, double offset = 0.0);
  static Potential piecewise_linear(std::vector<double> breakpoints, std::vector<double> slopes, double offset = 0.0);
  static Potential general(std::function<double(double)> v, std::function<double(double)> dv,
                           std::function<double(double)> d2v, std::string name = "V");
  // V = k x^4 / 4
  static Potential quartic(double k);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  // Slope regions; a general potential is a single region over the whole line.
  int region_count() const;
  int region(double x) const;
  std::pair<double, double> region_bounds(int r) const;
  double region_slope(int r) const;
  bool piecewise() const { return kind_ != Kind::General; }

  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& slopes() const { return slopes_; }

 private:
  Kind kind_ = Kind::Zero;
  std::string name_ = "0";
  std::vector<double> breaks_;
  std::vector<double> slopes_{0.0};
  double offset_ = 0.0;
  std::function<double(double)> v_, dv_, d2v_;
};

}  // namespace qrf

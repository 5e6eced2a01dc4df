#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrf/observable.hpp"

namespace qrf {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using Masses = std::map<std::string, double>;

struct Grid1D {
  int n = 256;
  double dx = 0.1;
  double hbar = 1.0;

  Grid1D() = default;
  Grid1D(int n, double dx, double hbar = 1.0);

  double x(int k) const { return (k - n / 2) * dx; }
  double dp() const;
  double p(int j) const { return (j - n / 2) * dp(); }
  double length() const { return n * dx; }
  double x_min() const { return x(0); }
  double x_max() const { return x(n - 1); }
  // Exact grid index of x0; throws std::invalid_argument when x0 is off-grid.
  int index_of(double x0) const;
  int parity_index(int k) const { return (n - k) % n; }
  bool operator==(const Grid1D& o) const = default;
};

enum class Rep { Position, Momentum };
enum class AxisKind { Continuous, Discrete, Photon };

struct Axis {
  std::string label;
  AxisKind kind = AxisKind::Continuous;
  Grid1D grid;
  double mass = 1.0;
  Rep rep = Rep::Position;
  // photon mode: omega_k = omega0 + k * domega, all > 0
  double omega0 = 0.0;
  double domega = 0.0;
  int n_omega = 0;
  // discrete levels
  std::vector<std::string> levels;
  std::vector<double> energies;

  static Axis continuous(std::string label, const Grid1D& g, double mass = 1.0);
  static Axis discrete(std::string label, std::vector<std::string> levels, std::vector<double> energies);
  static Axis photon(std::string label, int n, double omega0, double domega);

  int dim() const;
  // Coordinate of basis index i in the axis' current representation.
  double coord(int i) const;
  // Measure of one cell: dx, dp, domega or 1.
  double measure() const;
  double omega(int i) const { return omega0 + i * domega; }
  int level_index(const std::string& name) const;
  bool same_layout(const Axis& o, double tol = 1e-12) const;
};

// Amplitudes are stored as orthonormal coefficients c = psi * sqrt(measure),
// row-major with the last axis fastest.
struct MultiState {
  std::vector<Axis> axes;
  CVec amp;
  std::string frame = "C";
  double frame_mass = 1.0;
  double time = 0.0;

  std::vector<int> dims() const;
  std::vector<std::size_t> strides() const;
  std::size_t size() const;
  int axis_index(const std::string& label) const;
  bool has(const std::string& label) const;
  const Axis& axis(const std::string& label) const;
  Axis& axis(const std::string& label);
  std::vector<std::string> labels() const;
  double norm() const;
  void validate() const;
};

struct PhotonState {
  cplx vacuum_amplitude = 0.0;
  Axis mode_axis;
  CVec mode;  // orthonormal coefficients on mode_axis
  double norm() const;
  void validate(double tol = 1e-10) const;
};

// ---- constructors ----
MultiState coherent_state(const Grid1D& grid, double x0, double p0, double sigma, const std::string& label = "A",
                          double mass = 1.0);
MultiState sharp_state(const Grid1D& grid, double x0, const std::string& label = "A", double mass = 1.0);
// Normalized superposition of states over identical axes.
MultiState superpose(const std::vector<MultiState>& parts, const std::vector<cplx>& weights);
MultiState tensor(const std::vector<MultiState>& parts);
MultiState from_amplitudes(std::vector<Axis> axes, CVec amp, const std::string& frame = "C", double frame_mass = 1.0);
// Sum of `components` random coherent packets on each continuous axis, centred within
// `box` (fraction of each half-width) and entangled across axes via random weights.
MultiState random_smooth_state(std::vector<Axis> axes, std::uint64_t seed, int components = 3, double box = 0.25,
                               double sigma_cells = 4.0);

// ---- representation changes and axis maps ----
MultiState to_momentum_rep(const MultiState& s, const std::string& label);
MultiState from_momentum_rep(const MultiState& s, const std::string& label);
MultiState with_rep(const MultiState& s, const std::string& label, Rep rep);
MultiState all_position(const MultiState& s);
void dft_axis_inplace(MultiState& s, int ax, bool forward);
MultiState parity_axis(const MultiState& s, const std::string& label);
MultiState rescale_axis(const MultiState& s, const std::string& label, double factor);
MultiState relabel(const MultiState& s, const std::string& from, const std::string& to, double new_mass);
MultiState permuted(const MultiState& s, const std::vector<std::string>& order);

// ---- diagnostics ----
Eigen::MatrixXcd to_matrix(const MultiState& s, const std::vector<std::string>& rows);
Eigen::MatrixXcd reduced_density(const MultiState& s, const std::vector<std::string>& keep);
double purity(const Eigen::MatrixXcd& rho);
double schmidt_entropy(const MultiState& s, const std::vector<std::string>& side);
// Probability per basis index of one axis (sums to 1).
std::vector<double> marginal(const MultiState& s, const std::string& label);
// Inner product after aligning axis order by label.
cplx inner(const MultiState& a, const MultiState& b);
double fidelity(const MultiState& a, const MultiState& b);
double distance(const MultiState& a, const MultiState& b);
MultiState normalized(const MultiState& s);

// Applies x (momentum=false) or p (momentum=true) of one axis; result in the input representation.
MultiState apply_quadrature(const MultiState& s, const std::string& label, bool momentum);
double expectation(const MultiState& s, const QuadObservable& obs);
double mean_x(const MultiState& s, const std::string& label);
double mean_p(const MultiState& s, const std::string& label);
double variance_x(const MultiState& s, const std::string& label);
double variance_p(const MultiState& s, const std::string& label);

// ---- internal tensor helpers ----
struct FiberLayout {
  std::size_t count = 0;   // number of fibres
  std::size_t stride = 1;  // distance between consecutive fibre elements
  std::size_t n = 0;       // fibre length
  std::size_t inner = 1;
  std::size_t base(std::size_t f) const { return (f / inner) * n * inner + (f % inner); }
};
FiberLayout fiber_layout(const std::vector<int>& dims, int ax);
std::vector<int> unravel(std::size_t flat, const std::vector<int>& dims);

}  // namespace qrf

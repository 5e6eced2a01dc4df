#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qrf {

// Operator vector ordering for N labels: (x_1, p_1, ..., x_N, p_N).
// O = constant + lin . z + z^T quad z, quadratic part in symmetric (Weyl) order.
struct QuadObservable {
  std::vector<std::string> labels;
  Eigen::VectorXd lin;
  Eigen::MatrixXd quad;
  double constant = 0.0;

  QuadObservable() = default;
  explicit QuadObservable(std::vector<std::string> labels);

  static QuadObservable x(const std::string& label);
  static QuadObservable p(const std::string& label);
  static QuadObservable scalar(double value);

  int index(const std::string& label) const;  // -1 when absent
  int size() const { return static_cast<int>(labels.size()); }

  // Same observable expressed over a different label list; throws
  // std::invalid_argument if a label carrying a nonzero coefficient is dropped.
  QuadObservable over(const std::vector<std::string>& new_labels) const;
  QuadObservable relabeled(const std::map<std::string, std::string>& rename) const;
  // Drops labels whose coefficients are all zero.
  QuadObservable pruned(double tol = 0.0) const;

  double cx(const std::string& label) const;
  double cp(const std::string& label) const;
  double qq(const std::string& a, bool a_mom, const std::string& b, bool b_mom) const;

  bool has_quadratic(double tol = 0.0) const;
  bool position_only(double tol = 0.0) const;
  bool momentum_only(double tol = 0.0) const;
  bool is_hermitian(double tol = 1e-12) const;
};

QuadObservable operator+(const QuadObservable& a, const QuadObservable& b);
QuadObservable operator-(const QuadObservable& a, const QuadObservable& b);
QuadObservable operator-(const QuadObservable& a);
QuadObservable operator*(double s, const QuadObservable& a);
QuadObservable operator+(const QuadObservable& a, double c);

// Symmetrized product (ab + ba)/2 of two affine observables.
QuadObservable sym_product(const QuadObservable& a, const QuadObservable& b);

// Maximum coefficient difference after aligning labels.
double coefficient_distance(const QuadObservable& a, const QuadObservable& b);

// Text form, e.g. "q_B - q_C + 0.5 pi_C". Labels listed in `primed` use q/pi names.
std::string format_observable(const QuadObservable& o, bool primed);

}  // namespace qrf

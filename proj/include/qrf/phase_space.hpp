#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrf/observable.hpp"

namespace qrf {

using Masses = std::map<std::string, double>;

// Heisenberg image of a frame change: S z_in S^dagger = M z_out + shift, with
// z = (x_1, p_1, ..., x_N, p_N). Rows follow in_labels, columns follow out_labels.
struct PhaseSpaceMap {
  std::string name;
  std::vector<std::string> in_labels;
  std::vector<std::string> out_labels;
  Eigen::MatrixXd M;
  Eigen::VectorXd shift;
  double t = 0.0;
  double tau = 0.0;
  Masses masses;
  // Optional symbolic coefficients, same shape as M ("" for zero entries).
  std::vector<std::vector<std::string>> symbolic;

  int dim() const { return static_cast<int>(M.rows()); }
  int in_index(const std::string& label) const;
  int out_index(const std::string& label) const;
  // Image of a single in-operator as an observable over out_labels.
  QuadObservable image(const std::string& label, bool momentum) const;
  PhaseSpaceMap reordered(const std::vector<std::string>& in_order, const std::vector<std::string>& out_order) const;
};

Eigen::MatrixXd symplectic_form(int n_labels);
double symplectic_defect(const PhaseSpaceMap& m);
bool is_canonical(const PhaseSpaceMap& m, double tol = 1e-12);

PhaseSpaceMap identity_map(const std::vector<std::string>& labels);

// Frame change from the frame of `old_frame` to the frame of `ref`; the remaining
// systems are `spectators`. Defaults reproduce the A, B, C configuration.
PhaseSpaceMap map_Sx(const std::string& ref = "A", const std::vector<std::string>& spectators = {"B"},
                     const std::string& old_frame = "C");
PhaseSpaceMap map_Sp(const std::string& ref = "A", const std::vector<std::string>& spectators = {"B"},
                     const std::string& old_frame = "C");
PhaseSpaceMap map_ST(double t, double tau, const Masses& masses, const std::string& ref = "A",
                     const std::vector<std::string>& spectators = {"B"}, const std::string& old_frame = "C");
PhaseSpaceMap map_Sb(double t, const Masses& masses, const std::string& ref = "A",
                     const std::vector<std::string>& spectators = {"B"}, const std::string& old_frame = "C");
PhaseSpaceMap map_Sv(const Masses& masses, const std::string& ref = "A",
                     const std::vector<std::string>& spectators = {"B"}, const std::string& old_frame = "C");

// x_from -> -q_to, p_from -> -pi_to.
PhaseSpaceMap parity_map(const std::string& from, const std::string& to);
// x_from -> -(m_to/m_from) q_to, p_from -> -(m_from/m_to) pi_to.
PhaseSpaceMap velocity_parity_map(const std::string& from, const std::string& to, double m_from, double m_to);
// Conjugation by exp((i/hbar) lambda G) for a quadratic generator G.
PhaseSpaceMap generator_flow(const QuadObservable& G, double lambda, double hbar = 1.0);
// Adds identity action on labels not yet present on both sides.
PhaseSpaceMap extended(const PhaseSpaceMap& m, const std::vector<std::string>& extra);

PhaseSpaceMap inverse(const PhaseSpaceMap& m);
// Map of S_outer S_inner; requires outer.in_labels == inner.out_labels as sets.
PhaseSpaceMap compose(const PhaseSpaceMap& outer, const PhaseSpaceMap& inner);
double map_distance(const PhaseSpaceMap& a, const PhaseSpaceMap& b);

// S O S^dagger, returned over out_labels.
QuadObservable conjugate_observable(const PhaseSpaceMap& m, const QuadObservable& obs);

struct ConservedMapping {
  std::vector<QuadObservable> images;   // S C_i S^dagger
  std::vector<QuadObservable> targets;  // label-swapped forms
  Eigen::MatrixXd gamma;                // targets_i = sum_j gamma(i, j) images_j
  bool ok = true;
  std::string report;
  double residual = 0.0;
};

// `swap` renames source labels to target-frame labels (e.g. A -> C). Targets are the
// swapped source forms; each is expressed through a minimal-support combination.
ConservedMapping map_conserved_set(const PhaseSpaceMap& m, const std::vector<QuadObservable>& set,
                                   const std::map<std::string, std::string>& swap);
// Explicit target forms, for quantities whose coefficients carry the swapped system's mass
// (G_A = t p_A - m_A x_A becomes G_C = t pi_C - m_C q_C).
ConservedMapping map_conserved_set(const PhaseSpaceMap& m, const std::vector<QuadObservable>& set,
                                   const std::vector<QuadObservable>& targets);

struct NaiveRelativeReport {
  int N = 0;
  Eigen::MatrixXd R;         // 2(N-1) x 2N: relative operators in terms of absolute ones
  Eigen::MatrixXd brackets;  // R Omega R^T
  double defect = 0.0;       // max |brackets - Omega|
  bool canonical = true;
  std::vector<std::string> offending;  // e.g. "{x^r_1, p^r_2} = 0.5"
};

NaiveRelativeReport naive_relative_map(int N, const std::vector<double>& masses);

// One line per operator image, e.g. "x_B -> q_B - q_C + (1/m_C)(t-tau) pi_C".
std::string print_map(const PhaseSpaceMap& m);

}  // namespace qrf

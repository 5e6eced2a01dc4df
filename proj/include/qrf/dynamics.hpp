#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qrf/grid.hpp"
#include "qrf/kernels.hpp"
#include "qrf/observable.hpp"
#include "qrf/phase_space.hpp"
#include "qrf/potential.hpp"

namespace qrf {

struct QrfUnitary;

// Diagonal term f(coords) in one representation. Photon and discrete axes always
// contribute their native coordinate (omega or level index).
struct FunctionTerm {
  std::string name;
  std::vector<std::string> labels;
  Rep rep = Rep::Position;
  CoordFn f;
};

struct HamiltonianSpec {
  std::string frame = "C";
  QuadObservable quad;              // kinetic terms, linear and quadratic potentials
  std::vector<FunctionTerm> terms;  // non-polynomial diagonal terms

  HamiltonianSpec& add(const QuadObservable& q);
  HamiltonianSpec& add(FunctionTerm t);
  std::vector<std::string> labels() const;
};

QuadObservable kinetic(const std::string& label, double mass);
HamiltonianSpec free_hamiltonian(const std::vector<std::string>& labels, const Masses& masses,
                                 const std::string& frame = "C");
// scale * V(arg_scale * x_label)
FunctionTerm potential_term(const std::string& label, const Potential& v, double scale = 1.0, double arg_scale = 1.0);
FunctionTerm photon_dispersion(const std::string& label, double hbar = 1.0);
FunctionTerm level_energies(const std::string& label, std::vector<double> energies);

// Strang split-step evolution by t_total (negative allowed), step |dt|.
MultiState evolve(const MultiState& s, const HamiltonianSpec& h, double t_total, double dt);

// Builds H for a role assignment: roles[0] plays A, roles[1] plays B.
struct HamiltonianForm {
  std::string name;
  std::function<HamiltonianSpec(const std::vector<std::string>& roles, const Masses& masses)> build;
};
HamiltonianForm free_form();
// p_A^2/2m_A + p_B^2/2m_B - (p_A + p_B)^2 / 2M, M = sum of all masses
HamiltonianForm relative_velocity_form();

// Eq. (5): S H S^dagger + i hbar (dS/dt) S^dagger, computed algebraically.
HamiltonianSpec transform_hamiltonian(const QrfUnitary& u, const HamiltonianSpec& h);

struct SymmetryReport {
  bool symmetric = false;
  double distance = 0.0;
  std::string transformed;
  std::string expected;
};
SymmetryReport is_symmetry(const QrfUnitary& u, const HamiltonianForm& form, const Masses& masses);

using UnitaryFamily = std::function<MultiState(const MultiState&, double t)>;
// || S(t) U_source(t) psi0 - U_target(t) S(0) psi0 ||
double commuting_diagram_residual(const UnitaryFamily& s, const HamiltonianSpec& h_source,
                                  const HamiltonianSpec& h_target, const MultiState& psi0, double t, double dt);

struct Branch {
  double x0 = 0.0;
  double p0 = 0.0;
  double sigma = 1.0;
  double mass = 1.0;
  double hbar = 1.0;
};
// Largest t with the branch centre shift plus 5 sigma(t) inside the initial slope region.
double localization_window(const Potential& v, const Branch& b, double t_max = 1e3);

struct AccelerationCheck {
  std::vector<double> accelerations;  // per branch, -(1/m) V'(centre)
  std::vector<double> centres;
  double residual = 0.0;              // || -(1/m)V'psi - sum a_i psi_i || / || psi ||
};
// state_A must be a single-axis state holding well separated branches.
AccelerationCheck acceleration_superposition_check(const Potential& v, const MultiState& state_a, double mass);

struct TrotterDisplacement {
  double dt = 0.0;
  double mass = 1.0;
  QuadObservable linear_part;  // (p/m) dt, plus -(slope/2m) dt^2 for linear V
  std::function<double(double x, double p)> displacement;  // X_A(dt) evaluated on phase-space points
  double error_bound = 0.0;   // estimated O(dt^3) term
};
TrotterDisplacement trotter_XA(const Potential& v, double dt, double mass, double x_scale = 1.0,
                               double p_scale = 1.0, double tol = 1e-6);

}  // namespace qrf

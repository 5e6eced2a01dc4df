#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrf/grid.hpp"
#include "qrf/phase_space.hpp"
#include "qrf/potential.hpp"

namespace qrf {

// The new reference system `ref`, the systems it describes besides the old
// frame (`spectators`), and the label the old frame receives.
struct FrameRoles {
  std::string ref = "A";
  std::vector<std::string> spectators = {"B"};
  std::string old_frame = "C";
};

enum class UnitaryKind { Sx, Sp, ST, Sb, Sv, SEP, SD, ParitySwap, VelocityParity, Identity };

struct QrfUnitary {
  UnitaryKind kind = UnitaryKind::Identity;
  double t = 0.0;
  double tau = 0.0;
  Masses masses;
  FrameRoles roles;
  std::optional<Potential> potential;  // SEP
  double c = 137.0;                    // SD
  std::string photon = "B";            // SD photon axis
  double dt = 1e-3;                    // internal propagation step (SEP)
  bool include_curvature = false;      // SEP general potential: keep the V'' term

  std::string name() const;
  std::string source_frame() const { return roles.old_frame; }
  std::string target_frame() const { return roles.ref; }
  // Phase-space map where one exists (not for SEP with nonlinear V or SD).
  std::optional<PhaseSpaceMap> map() const;
};

// ---- parity family ----
MultiState apply_parity_swap(const MultiState& s, const std::string& from, const std::string& to,
                             double new_mass = 0.0);
MultiState apply_velocity_parity(const MultiState& s, const std::string& from, const std::string& to,
                                 double m_from, double m_to);

// ---- frame changes; the state's frame tag must equal roles.old_frame ----
MultiState apply_Sx(const MultiState& s, const FrameRoles& roles = {});
MultiState apply_Sp(const MultiState& s, const FrameRoles& roles = {});
MultiState apply_ST(const MultiState& s, double t, double tau, const FrameRoles& roles = {});
MultiState apply_Sb(const MultiState& s, double t, const FrameRoles& roles = {});
MultiState apply_Sv(const MultiState& s, const FrameRoles& roles = {});

struct SEPOptions {
  double dt = 1e-3;                 // split-step size for the A and C propagators
  double localization_tol = 1e-6;   // allowed mass of a branch outside its slope region
};
struct SEPReport {
  std::vector<double> branch_slopes;
  std::vector<double> branch_weights;
  double ordering_residual = 0.0;  // general V: || (V'(x) - g_r) psi_r || t / hbar
};
// Piecewise-linear (or linear) potential: branch-wise Q_t. General potential: the
// curvature-free local linearization of each branch (valid for short t).
MultiState apply_SEP(const MultiState& s, double t, const Potential& v, const FrameRoles& roles = {},
                     const SEPOptions& opt = {}, SEPReport* report = nullptr);

// Photon dilation R_f on axis `photon`: |omega> -> |f omega> with amplitude 1/sqrt f.
// Per slice of `control` (momentum representation) f = 1 + pi / (c m_control).
struct SDOptions {
  double unitarity_tol = 1e-3;
};
// Rest frame (old frame = atom, `lab` axis present) -> lab frame.
// lab_axis: spatial axis of the laboratory in the atom frame ("C"); atom: the label it becomes ("A").
MultiState apply_SD(const MultiState& s, double t, double c, const std::string& lab_axis = "C",
                    const std::string& atom = "A", const std::string& photon = "B", const SDOptions& opt = {});
MultiState apply_SD_inverse(const MultiState& s, double t, double c, const std::string& lab_axis = "C",
                            const std::string& atom = "A", const std::string& photon = "B",
                            const SDOptions& opt = {});
// Dilates the photon axis by f(control momentum); inverse uses 1/f.
MultiState apply_photon_dilation(const MultiState& s, const std::string& photon, const std::string& control,
                                 double c, double m_control, bool inverse, const SDOptions& opt = {});

MultiState apply(const QrfUnitary& u, const MultiState& s);

// ---- classical extended Galilean operators on one subsystem ----
enum class ClassicalKind { Translation, Boost, Acceleration };
struct ClassicalParams {
  double X0 = 0.0;  // translation
  double v = 0.0;   // boost
  double t = 0.0;   // boost / acceleration time
  double a = 0.0;   // acceleration, X(t) = a t^2 / 2
};
MultiState classical_oracle(ClassicalKind kind, const ClassicalParams& p, const MultiState& s,
                            const std::string& label);

}  // namespace qrf

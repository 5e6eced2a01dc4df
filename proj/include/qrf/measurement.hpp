#pragma once

#include <string>
#include <vector>

#include "qrf/grid.hpp"
#include "qrf/observable.hpp"
#include "qrf/operators.hpp"

namespace qrf {

// Pointer measurement of a position-only or momentum-only observable: the pointer E
// (spike at 0, or a Gaussian of `pointer_width` cells) is shifted by the observable
// value through exp(-(i/hbar) O p_E) and read out projectively.
struct MeasurementModel {
  QuadObservable observable;
  std::string frame = "C";
  std::string pointer = "E";
  double pointer_dx = 0.0;     // 0: the lattice of the observable's first label (dx or dp)
  int pointer_n = 0;           // 0: sized to the support of the state
  double pointer_width = 0.0;  // cells; 0 is the projective limit
  // apparatus position M; empty label means no apparatus
  std::string apparatus;
  Grid1D apparatus_grid{40, 0.25};
  double apparatus_mass = 1.0;
  double apparatus_x0 = 0.0;
  double apparatus_sigma = 0.6;
};

struct OutcomeDistribution {
  std::vector<double> outcome;
  std::vector<double> probability;
  double total() const;
  double at(double b) const;  // probability of the outcome nearest to b (0 if off the grid)
};

// Adds the apparatus axis (Gaussian at apparatus_x0) when the model has one and the state lacks it.
MultiState attach_apparatus(const MultiState& s, const MeasurementModel& m);
// Resolves pointer_dx for the given state.
MeasurementModel resolved(const MeasurementModel& m, const MultiState& s);
OutcomeDistribution measure_via_pointer(const MultiState& s, const MeasurementModel& m);

// Frame change including the apparatus as an extra spectator.
QrfUnitary with_apparatus(const QrfUnitary& u, const MeasurementModel& m);
// Observable mapped by S O S^dagger; the pointer is left untouched.
MeasurementModel transform_measurement_model(const QrfUnitary& u, const MeasurementModel& m);
// max_b |p_source(b) - p_target(b)|, target computed from the transformed state and model.
double probability_invariance_residual(const MultiState& s, const MeasurementModel& m, const QrfUnitary& u);

// Two-level atom `levels` {g, e} absorbing a photon on axis `photon` within
// |omega - delta_e/hbar| <= window (rest frame). In the lab frame the window is
// Doppler-dressed per atom momentum: omega / (1 - p/(c m)) must fall in it.
struct AbsorptionModel {
  std::string levels = "At";
  std::string photon = "B";
  std::string atom = "A";  // atom label in the lab frame, and name of the rest frame
  std::string lab = "C";   // lab label in the rest frame, and name of the lab frame
  double delta_e = 1.0;
  double window = 0.0;  // half-width; 0 means one frequency bin
  double c = 137.0;
  double hbar = 1.0;
};

Axis two_level_axis(const std::string& label, double delta_e);
// photon packet on `axis` (normalized Gaussian of width sigma)
MultiState photon_packet(const Axis& axis, double omega, double sigma);

MultiState apply_absorption_channel(const std::string& frame, const MultiState& s, const AbsorptionModel& m);
double absorption_probability(const std::string& frame, const MultiState& s, const AbsorptionModel& m);
// |P_rest(s) - P_lab(S_D s)|
double absorption_invariance_residual(const MultiState& rest, const AbsorptionModel& m, double t);

// Lab state prop. to int dp e^{-i p^2 t/2m} psi(p) |p>_A |omega_B (1 - p/(m c))>_B |g>, the photon a
// Doppler-dilated Gaussian of rest width sigma_omega.
MultiState prepare_resonant_lab_state(const MultiState& atom, const Axis& photon, double omega_b, double sigma_omega,
                                      double c, double t, double lab_mass, const std::string& levels = "At",
                                      double delta_e = 1.0);

}  // namespace qrf

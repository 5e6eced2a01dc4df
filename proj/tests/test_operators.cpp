#include <cmath>

#include "doctest.h"
#include "qrf/measurement.hpp"
#include "qrf/operators.hpp"

using namespace qrf;

namespace {

MultiState framed(MultiState s, const std::string& frame, double mass) {
  s.frame = frame;
  s.frame_mass = mass;
  return s;
}

// Single-axis momentum eigenstate on the grid point nearest p.
MultiState momentum_sharp(const Grid1D& g, double p, const std::string& label, double mass) {
  Axis ax = Axis::continuous(label, g, mass);
  ax.rep = Rep::Momentum;
  CVec amp(g.n, 0.0);
  amp.at(static_cast<int>(std::lround(p / g.dp())) + g.n / 2) = 1.0;
  return from_amplitudes({ax}, amp);
}

double reduced_fidelity(const MultiState& s, const std::string& label, const MultiState& pure) {
  const Eigen::MatrixXcd rho = reduced_density(all_position(s), {label});
  CVec v = all_position(pure).amp;
  const Eigen::Map<Eigen::VectorXcd> e(v.data(), static_cast<Eigen::Index>(v.size()));
  return (e.adjoint() * rho * e)(0, 0).real();
}

}  // namespace

TEST_CASE("parity swap") {
  const Grid1D g(128, 0.1);
  const MultiState s = sharp_state(g, 0.7, "A");
  const MultiState c = apply_parity_swap(s, "A", "C");
  CHECK(c.has("C"));
  CHECK_FALSE(c.has("A"));
  CHECK(mean_x(c, "C") == doctest::Approx(-0.7));
  CHECK(distance(apply_parity_swap(c, "C", "A"), s) == 0.0);

  const MultiState gs = coherent_state(g, 1.0, 0.8, 0.5, "A");
  const MultiState gc = apply_parity_swap(gs, "A", "C");
  CHECK(std::abs(mean_x(gc, "C") + 1.0) < 1e-12);
  CHECK(std::abs(mean_p(gc, "C") + 0.8) < 1e-12);

  MultiState d = from_amplitudes({Axis::discrete("L", {"g", "e"}, {0.0, 1.0})}, {1.0, 0.0});
  CHECK_THROWS(apply_parity_swap(d, "L", "K"));
}

TEST_CASE("velocity parity") {
  const Grid1D g(128, 0.1);
  const MultiState s = coherent_state(g, 1.0, 0.6, 0.5, "A", 1.0);
  CHECK(distance(apply_velocity_parity(s, "A", "C", 1.0, 1.0), apply_parity_swap(s, "A", "C")) == 0.0);

  // x_A -> -(m_C/m_A) q_C and p_A -> -(m_A/m_C) pi_C, so <q_C> = -(m_A/m_C) <x_A>
  const MultiState v = apply_velocity_parity(s, "A", "C", 1.0, 2.0);
  CHECK(std::abs(mean_x(v, "C") + 0.5) < 1e-6);
  CHECK(std::abs(mean_p(v, "C") / 2.0 + 0.6 / 1.0) < 1e-6);
  CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  CHECK_THROWS(apply_velocity_parity(s, "A", "C", 1.0, 0.0));
}

TEST_CASE("S_x translates B by the position of A") {
  const Grid1D g(128, 0.1);
  const double x0 = 1.2;
  const MultiState b = coherent_state(g, 0.5, 0.3, 0.4, "B");
  const MultiState out = apply_Sx(framed(tensor({sharp_state(g, x0, "A"), b}), "C", 1.0));
  CHECK(out.frame == "A");
  CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  // psi(q_B + x0) tensor |-x0>_C
  const MultiState expect = tensor({coherent_state(g, 0.5 - x0, 0.3, 0.4, "B"), sharp_state(g, -x0, "C")});
  CHECK(fidelity(out, expect) > 1.0 - 1e-12);

  const MultiState still = apply_Sx(framed(tensor({sharp_state(g, 0.0, "A"), b}), "C", 1.0));
  CHECK(fidelity(still, tensor({b, sharp_state(g, 0.0, "C")})) > 1.0 - 1e-12);

  CHECK_THROWS(apply_Sx(framed(tensor({sharp_state(g, 0.0, "A"), b}), "B", 1.0)));
  // translation beyond half the B grid is refused
  CHECK_THROWS(apply_Sx(framed(tensor({sharp_state(g, 6.5, "A"), b}), "C", 1.0)));
}

TEST_CASE("S_x keeps spectators") {
  const Grid1D g(64, 0.2);
  const MultiState s = framed(tensor({sharp_state(g, 0.4, "A"), coherent_state(g, 0.0, 0.0, 0.7, "B"),
                                      coherent_state(g, 0.0, 0.2, 0.8, "D")}),
                              "C", 1.0);
  FrameRoles r;
  r.spectators = {"B", "D"};
  const MultiState out = apply_Sx(s, r);
  CHECK(std::abs(mean_x(out, "B") + 0.4) < 1e-10);
  CHECK(std::abs(mean_x(out, "D") + 0.4) < 1e-10);
  CHECK(std::abs(mean_p(out, "D") - 0.2) < 1e-10);
}

TEST_CASE("S_p kicks B by minus the momentum of A") {
  const Grid1D g(128, 0.1);
  const double p0 = 4 * g.dp();
  const MultiState b = coherent_state(g, 0.0, 0.5, 0.5, "B");
  const MultiState out = apply_Sp(framed(tensor({momentum_sharp(g, p0, "A", 1.0), b}), "C", 1.0));
  CHECK(std::abs(mean_p(out, "B") - (0.5 - p0)) < 1e-10);
  CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  const MultiState zero = apply_Sp(framed(tensor({momentum_sharp(g, 0.0, "A", 1.0), b}), "C", 1.0));
  CHECK(reduced_fidelity(zero, "B", b) > 1.0 - 1e-12);
}

TEST_CASE("S_T at t = tau is S_x") {
  const Grid1D g(64, 0.2);
  const MultiState s = framed(random_smooth_state({Axis::continuous("A", g), Axis::continuous("B", g)}, 4, 3, 0.1, 2.5),
                              "C", 1.0);
  const MultiState a = apply_ST(s, 0.9, 0.9), b = apply_Sx(s);
  CHECK(fidelity(a, b) >= 1.0 - 1e-10);
  const MultiState moved = apply_ST(s, 0.5, 0.1);
  CHECK(std::abs(moved.norm() - 1.0) < 1e-10);
}

TEST_CASE("S_b on a momentum eigenstate of A is a classical boost") {
  const Grid1D g(128, 0.1);
  const double mA = 2.0, t = 0.5;
  const double pA = 6 * g.dp();
  const MultiState b = coherent_state(g, 0.0, 0.0, 0.5, "B", 1.0);
  const MultiState out = apply_Sb(framed(tensor({momentum_sharp(g, pA, "A", mA), b}), "C", 1.0), t);
  CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  const MultiState expect = classical_oracle(ClassicalKind::Boost, ClassicalParams{0.0, pA / mA, t, 0.0}, b, "B");
  CHECK(reduced_fidelity(out, "B", expect) > 1.0 - 1e-8);
  // boost shifts <p_B> by -m_B v
  CHECK(std::abs(mean_p(expect, "B") + pA / mA) < 1e-10);

  const MultiState rest = apply_Sb(framed(tensor({momentum_sharp(g, 0.0, "A", mA), b}), "C", 1.0), t);
  CHECK(reduced_fidelity(rest, "B", b) > 1.0 - 1e-12);
}

TEST_CASE("S_EP with V = 0 is S_b") {
  const Grid1D g(64, 0.2);
  const MultiState s = framed(random_smooth_state({Axis::continuous("A", g), Axis::continuous("B", g)}, 9, 3, 0.1, 2.5),
                              "C", 1.0);
  SEPOptions opt;
  opt.dt = 0.05;
  const MultiState a = apply_SEP(s, 0.4, Potential::zero(), {}, opt);
  const MultiState b = apply_Sb(s, 0.4);
  CHECK(distance(a, b) < 1e-10);
}

TEST_CASE("S_EP on one branch of a uniform field matches the classical acceleration") {
  // A heavy and wide, so its momentum spread barely entangles B: the residual infidelity is
  // about t (dp_A / m_A)^2 m_B = 2.6e-8 here
  const Grid1D ga(1024, 0.05), gb(128, 0.1);
  const double mA = 400.0, a = 0.5, t = 0.2;
  const MultiState b = coherent_state(gb, 0.0, 0.0, 0.5, "B");
  // frame-C state at time t: A has fallen from rest in V = -m_A a x
  const MultiState s = framed(tensor({coherent_state(ga, 0.0, mA * a * t, 3.5, "A", mA), b}), "C", 1.0);
  SEPOptions opt;
  opt.dt = 0.01;
  const MultiState out = apply_SEP(s, t, Potential::linear(-mA * a), {}, opt);
  CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  CHECK(std::abs(mean_x(out, "B") + 0.5 * a * t * t) < 1e-9);
  CHECK(std::abs(mean_p(out, "B") + a * t) < 1e-9);
  const MultiState expect = classical_oracle(ClassicalKind::Acceleration, ClassicalParams{0.0, 0.0, t, a}, b, "B");
  CHECK(reduced_fidelity(out, "B", expect) > 1.0 - 1e-6);
  const MultiState wrong = classical_oracle(ClassicalKind::Acceleration, ClassicalParams{0.0, 0.0, t, -a}, b, "B");
  CHECK(reduced_fidelity(out, "B", wrong) < 0.999);
}

TEST_CASE("S_D leaves the photon alone when the lab is at rest") {
  const Axis ph = Axis::photon("B", 64, 0.5, 0.02);
  const Grid1D g(64, 0.25);
  const MultiState photon = photon_packet(ph, 1.0, 0.05);
  MultiState s = tensor({momentum_sharp(g, 0.0, "C", 1.0), photon,
                         from_amplitudes({two_level_axis("At", 1.0)}, {1.0, 0.0})});
  s = framed(s, "A", 1.0);
  const MultiState lab = apply_SD(s, 0.0, 137.0);
  CHECK(lab.frame == "C");
  CHECK(reduced_fidelity(lab, "B", photon) > 1.0 - 1e-12);
  CHECK(std::abs(lab.norm() - 1.0) < 1e-3);
}

TEST_CASE("classical oracle") {
  const Grid1D g(128, 0.1);
  const MultiState s = coherent_state(g, 0.3, 0.2, 0.5, "B", 2.0);
  CHECK(distance(classical_oracle(ClassicalKind::Translation, ClassicalParams{}, s, "B"), s) < 1e-14);
  const MultiState tr = classical_oracle(ClassicalKind::Translation, ClassicalParams{0.8, 0, 0, 0}, s, "B");
  CHECK(std::abs(mean_x(tr, "B") - (0.3 - 0.8)) < 1e-10);
  const MultiState bo = classical_oracle(ClassicalKind::Boost, ClassicalParams{0, 0.5, 1.0, 0}, s, "B");
  CHECK(std::abs(mean_p(bo, "B") - (0.2 - 2.0 * 0.5)) < 1e-10);
  CHECK(std::abs(mean_x(bo, "B") - (0.3 - 0.5 * 1.0)) < 1e-10);
}

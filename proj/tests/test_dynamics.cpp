#include <cmath>

#include "doctest.h"
#include "qrf/dense.hpp"
#include "qrf/dynamics.hpp"
#include "qrf/operators.hpp"

using namespace qrf;

namespace {

using Q = QuadObservable;

MultiState framed(MultiState s, const std::string& frame, double mass) {
  s.frame = frame;
  s.frame_mass = mass;
  return s;
}

// Root of f on [a, b] by bisection, f(a) > 0 > f(b).
template <class F>
double bisect(F f, double a, double b) {
  for (int i = 0; i < 200; ++i) {
    const double m = 0.5 * (a + b);
    (f(m) > 0 ? a : b) = m;
  }
  return 0.5 * (a + b);
}

}  // namespace

TEST_CASE("free wavepacket") {
  const Grid1D g(256, 0.1);
  const double m = 2.0, x0 = -1.0, p0 = 1.5, s = 0.5, t = 1.0;
  const MultiState psi = coherent_state(g, x0, p0, s, "A", m);
  const MultiState out = evolve(psi, free_hamiltonian({"A"}, {{"A", m}}), t, 0.01);
  CHECK(std::abs(out.norm() - 1.0) < 1e-10);
  CHECK(std::abs(mean_x(out, "A") - (x0 + p0 / m * t)) < 1e-6);
  const double spread = t / (2.0 * m * s);
  CHECK(std::abs(variance_x(out, "A") - (s * s + spread * spread)) < 1e-4);
  CHECK(std::abs(mean_p(out, "A") - p0) < 1e-10);
}

TEST_CASE("uniform force: Ehrenfest is exact") {
  const Grid1D g(256, 0.1);
  const double m = 1.5, a = 0.8, p0 = 0.4, t = 1.0;
  HamiltonianSpec h = free_hamiltonian({"A"}, {{"A", m}});
  h.add(m * a * Q::x("A"));
  const MultiState out = evolve(coherent_state(g, 0.0, p0, 0.6, "A", m), h, t, 1e-2);
  CHECK(std::abs(mean_p(out, "A") - (p0 - m * a * t)) < 1e-6);
  CHECK(std::abs(mean_x(out, "A") - (p0 / m * t - 0.5 * a * t * t)) < 1e-6);
}

TEST_CASE("evolution is unitary and reversible") {
  const Grid1D g(64, 0.25);
  const Masses ms{{"A", 1.0}, {"B", 2.0}};
  HamiltonianSpec h = free_hamiltonian({"A", "B"}, ms);
  h.add(potential_term("A", Potential::quartic(0.05)));
  h.add(0.1 * sym_product(Q::x("A"), Q::x("B")));
  const MultiState psi = random_smooth_state({Axis::continuous("A", g, 1.0), Axis::continuous("B", g, 2.0)}, 3, 3, 0.1, 2.5);
  const MultiState fwd = evolve(psi, h, 0.7, 1e-2);
  CHECK(std::abs(fwd.norm() - 1.0) < 1e-10);
  CHECK(distance(evolve(fwd, h, -0.7, 1e-2), psi) < 1e-8);
  // x_A p_B mixes representations
  HamiltonianSpec bad;
  bad.add(sym_product(Q::x("A"), Q::p("B")));
  CHECK_THROWS(evolve(psi, bad, 0.1, 1e-2));
}

TEST_CASE("two branches in a piecewise-linear field") {
  const Grid1D g(512, 0.05);
  const double m = 1.0, a1 = 1.0, a2 = 2.0, s = 0.4;
  // slopes m a_i: branch i accelerates with -a_i
  const Potential v = Potential::piecewise_linear({0.0}, {m * a1, m * a2});
  const double x1 = -4.0, x2 = 4.0;
  const MultiState psi =
      superpose({coherent_state(g, x1, 0.0, s, "A", m), coherent_state(g, x2, 0.0, s, "A", m)}, {1.0, 1.0});
  const double w = std::min(localization_window(v, Branch{x1, 0.0, s, m, 1.0}),
                            localization_window(v, Branch{x2, 0.0, s, m, 1.0}));
  const double t = 0.5;
  REQUIRE(t < w);
  HamiltonianSpec h = free_hamiltonian({"A"}, {{"A", m}});
  h.add(potential_term("A", v));
  const MultiState out = evolve(psi, h, t, 1e-3);
  const auto mg = marginal(out, "A");
  double n1 = 0, c1 = 0, n2 = 0, c2 = 0;
  for (int k = 0; k < g.n; ++k) {
    if (g.x(k) < 0) {
      n1 += mg[k];
      c1 += mg[k] * g.x(k);
    } else {
      n2 += mg[k];
      c2 += mg[k] * g.x(k);
    }
  }
  CHECK(std::abs(c1 / n1 - (x1 - 0.5 * a1 * t * t)) < 1e-4);
  CHECK(std::abs(c2 / n2 - (x2 - 0.5 * a2 * t * t)) < 1e-4);
}

TEST_CASE("transformed Hamiltonians") {
  const Masses ms{{"A", 2.0}, {"B", 3.0}, {"C", 5.0}};
  const HamiltonianSpec free = free_hamiltonian({"A", "B"}, ms);
  const Q expect = kinetic("B", 3.0) + kinetic("C", 5.0);

  QrfUnitary st;
  st.kind = UnitaryKind::ST;
  st.t = 1.3;
  st.tau = 0.2;
  st.masses = ms;
  const HamiltonianSpec hst = transform_hamiltonian(st, free);
  CHECK(hst.frame == "A");
  CHECK(hst.terms.empty());
  CHECK(coefficient_distance(hst.quad, expect) < 1e-12);

  QrfUnitary sb = st;
  sb.kind = UnitaryKind::Sb;
  CHECK(coefficient_distance(transform_hamiltonian(sb, free).quad, expect) < 1e-12);

  // (m_C/m_A) V(-q_C) - (m_B/m_A) V'(-q_C) q_B for a piecewise-linear V
  const Masses eq{{"A", 1.0}, {"B", 3.0}, {"C", 1.0}};
  const Potential v = Potential::piecewise_linear({0.0}, {0.5, -1.5});
  QrfUnitary sep;
  sep.kind = UnitaryKind::SEP;
  sep.masses = eq;
  sep.potential = v;
  HamiltonianSpec h = free_hamiltonian({"A", "B"}, eq);
  h.add(potential_term("A", v));
  const HamiltonianSpec hep = transform_hamiltonian(sep, h);
  CHECK(coefficient_distance(hep.quad, kinetic("B", 3.0) + kinetic("C", 1.0)) < 1e-12);
  REQUIRE(hep.terms.size() == 2);
  for (const double qc : {-1.3, 0.7}) {
    for (const double qb : {-0.4, 2.0}) {
      const double z[2] = {qc, qb};
      const double zc[1] = {qc};
      CHECK(std::abs(hep.terms[0].f(zc) - v.value(-qc)) < 1e-14);
      CHECK(std::abs(hep.terms[1].f(z) + 3.0 * v.derivative(-qc) * qb) < 1e-14);
    }
  }
}

TEST_CASE("symmetry verdicts") {
  const Masses ms{{"A", 2.0}, {"B", 3.0}, {"C", 5.0}};
  QrfUnitary u;
  u.masses = ms;
  u.t = 0.9;
  u.kind = UnitaryKind::ST;
  CHECK(is_symmetry(u, free_form(), ms).symmetric);
  u.kind = UnitaryKind::Sb;
  CHECK(is_symmetry(u, free_form(), ms).symmetric);
  u.kind = UnitaryKind::Sv;
  CHECK_FALSE(is_symmetry(u, free_form(), ms).symmetric);
  CHECK(is_symmetry(u, relative_velocity_form(), ms).symmetric);
}

TEST_CASE("relative-velocity Hamiltonian") {
  // p_A^2/2m_A + p_B^2/2m_B - (p_A + p_B)^2/2M, M = m_A + m_B + m_C
  const Masses ms{{"A", 2.0}, {"B", 3.0}, {"C", 5.0}};
  const HamiltonianSpec h = relative_velocity_form().build({"A", "B"}, ms);
  const double M = 10.0;
  CHECK(std::abs(h.quad.qq("A", true, "A", true) - (0.25 - 0.5 / M)) < 1e-15);
  CHECK(std::abs(h.quad.qq("B", true, "B", true) - (1.0 / 6.0 - 0.5 / M)) < 1e-15);
  CHECK(std::abs(h.quad.qq("A", true, "B", true) + 0.5 / M) < 1e-15);
}

TEST_CASE("commuting diagram for S_T") {
  const Grid1D g(128, 0.1);
  const Masses ms{{"A", 1.0}, {"B", 1.0}, {"C", 1.0}};
  const MultiState psi = framed(
      tensor({coherent_state(g, 1.0, 0.5, 0.5, "A"), coherent_state(g, -1.0, -0.3, 0.5, "B")}), "C", 1.0);
  QrfUnitary u;
  u.kind = UnitaryKind::ST;
  u.masses = ms;
  const HamiltonianSpec hc = free_hamiltonian({"A", "B"}, ms), ha = transform_hamiltonian(u, hc);
  const UnitaryFamily fam = [](const MultiState& s, double t) { return apply_ST(s, t, 0.0); };
  CHECK(commuting_diagram_residual(fam, hc, ha, psi, 0.0, 1e-2) == 0.0);
  CHECK(commuting_diagram_residual(fam, hc, ha, psi, 1.0, 1e-2) <= 1e-6);
}

TEST_CASE("localization window") {
  const double m = 1.0, s = 0.5;
  // flat region of half-width 5: only spreading limits the window, 5 sigma(t) = 5
  const Potential flat = Potential::piecewise_linear({-5.0, 5.0}, {1.0, 0.0, -1.0});
  const double w0 = localization_window(flat, Branch{0.0, 0.0, s, m, 1.0});
  CHECK(std::abs(w0 - std::sqrt(1.0 - s * s) * 2.0 * m * s) < 1e-6);

  // sloped region centred on the branch: a t^2/2 + 5 sigma(t) = 5
  const double a = 3.0;
  const Potential tilt = Potential::piecewise_linear({-5.0, 5.0}, {0.0, m * a, 0.0});
  const double expect = bisect(
      [&](double t) { return 5.0 - (0.5 * a * t * t + 5.0 * std::hypot(s, t / (2 * m * s))); }, 0.0, 2.0);
  CHECK(std::abs(localization_window(tilt, Branch{0.0, 0.0, s, m, 1.0}) - expect) < 1e-6);

  CHECK_THROWS(localization_window(tilt, Branch{4.0, 0.0, s, m, 1.0}));
}

TEST_CASE("acceleration operator on branches") {
  const Grid1D g(512, 0.05);
  const double m = 1.0;
  const Potential v = Potential::piecewise_linear({0.0}, {-m * 1.0, -m * 2.0});
  const MultiState one = coherent_state(g, -4.0, 0.0, 0.4, "A", m);
  const AccelerationCheck c1 = acceleration_superposition_check(v, one, m);
  REQUIRE(c1.accelerations.size() == 1);
  CHECK(c1.accelerations[0] == doctest::Approx(1.0));
  CHECK(c1.residual < 1e-10);

  const MultiState two = superpose({one, coherent_state(g, 4.0, 0.0, 0.4, "A", m)}, {1.0, 1.0});
  const AccelerationCheck c2 = acceleration_superposition_check(v, two, m);
  REQUIRE(c2.accelerations.size() == 2);
  CHECK(c2.accelerations[0] == doctest::Approx(1.0));
  CHECK(c2.accelerations[1] == doctest::Approx(2.0));
  CHECK(c2.residual <= 1e-8);

  const AccelerationCheck lin = acceleration_superposition_check(Potential::linear(-0.7 * m), two, m);
  CHECK(lin.accelerations[0] == doctest::Approx(0.7));
  CHECK(lin.accelerations[1] == doctest::Approx(0.7));

  // a packet straddling the kink is not an acceleration eigenstate
  const AccelerationCheck straddle = acceleration_superposition_check(v, coherent_state(g, 0.0, 0.0, 0.4, "A", m), m);
  CHECK(straddle.accelerations.size() == 1);
  CHECK(straddle.residual > 0.1);
}

TEST_CASE("trotter displacement") {
  const TrotterDisplacement z = trotter_XA(Potential::zero(), 0.1, 2.0);
  CHECK(z.linear_part.cp("A") == doctest::Approx(0.05));
  CHECK(z.displacement(1.0, 3.0) == doctest::Approx(0.15));
  CHECK(z.error_bound == 0.0);

  const double a = 1.5, dt = 0.1, m = 2.0;
  const TrotterDisplacement l = trotter_XA(Potential::linear(m * a), dt, m);
  for (const double p : {-1.0, 0.0, 2.0}) CHECK(std::abs(l.displacement(0.3, p) - (p / m * dt - 0.5 * a * dt * dt)) < 1e-15);

  CHECK_THROWS(trotter_XA(Potential::quartic(1.0), 0.5, 1.0, 3.0, 3.0));
}

TEST_CASE("trotter displacement error is third order for a quartic potential") {
  const double k = 0.1, mass = 1.0;
  const Potential v = Potential::quartic(k);
  const Grid1D g(64, 0.25);
  const MultiState lay = sharp_state(g, 0.0, "A", mass);
  const Eigen::MatrixXcd X = dense::quadrature(lay, "A", false), P = dense::quadrature(lay, "A", true);
  const Eigen::MatrixXcd Vx =
      dense::function_operator(lay, {"A"}, {Rep::Position}, [&](const double* c) { return v.value(c[0]); });
  const Eigen::MatrixXcd H = P * P / (2.0 * mass) + Vx;
  const Eigen::MatrixXcd V = dense::smooth_subspace(lay, 2);
  std::vector<double> err;
  for (const double dt : {0.08, 0.04, 0.02}) {
    const Eigen::MatrixXcd U = dense::expi(H, -dt);
    const TrotterDisplacement td = trotter_XA(v, dt, mass, 1.0, 1.0, 1.0);
    const Eigen::MatrixXcd D =
        dense::function_operator(lay, {"A"}, {Rep::Position}, [&](const double* c) { return td.displacement(c[0], 0.0); });
    err.push_back(dense::compressed_distance(U.adjoint() * X * U, X + td.linear_part.lin(1) * P + D, V));
  }
  const double order = std::log2(err[1] / err[2]);
  CHECK(order > 2.5);
  CHECK(order < 3.5);
}

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "qrf/dense.hpp"
#include "qrf/dynamics.hpp"
#include "qrf/measurement.hpp"
#include "qrf/operators.hpp"
#include "qrf/phase_space.hpp"
#include "qrf/scenarios.hpp"

using namespace qrf;

namespace {

using Q = QuadObservable;

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

MultiState framed(MultiState s, const std::string& frame, double mass) {
  s.frame = frame;
  s.frame_mass = mass;
  return s;
}

std::vector<Axis> pair_axes(const Grid1D& ga, const Grid1D& gb, double ma, double mb) {
  return {Axis::continuous("A", ga, ma), Axis::continuous("B", gb, mb)};
}

FrameRoles roles(const std::string& ref, const std::string& spectator, const std::string& old) {
  FrameRoles r;
  r.ref = ref;
  r.spectators = {spectator};
  r.old_frame = old;
  return r;
}

ScenarioReport scenario(const std::string& name, const std::string& text = "") {
  return run_scenario(name, validate_config(text), "");
}

// ---- 1 ----
void unitarity_canonicity(Outcome& o) {
  const Grid1D g(64, 0.25);
  const Masses ms{{"A", 1.5}, {"B", 0.7}, {"C", 2.0}};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MultiState s = framed(random_smooth_state(pair_axes(g, g, 1.5, 0.7), seed, 3, 0.1, 2.5), "C", 2.0);
    const std::vector<MultiState> outs = {
        apply_Sx(s),
        apply_Sp(s),
        apply_ST(s, 0.8, 0.3),
        apply_Sb(s, 0.4),
        apply_Sv(s),
        apply_parity_swap(s, "A", "D"),
        apply_velocity_parity(s, "A", "D", 1.5, 2.0),
        apply_SEP(s, 0.2, Potential::linear(-0.5 * 1.5)),
    };
    for (const MultiState& out : outs) worst = std::max(worst, std::abs(out.norm() - 1.0));
  }
  o.detail << "norm defect " << worst;
  o.require(worst <= 1e-10, "norm 1e-10");

  const Axis ph = Axis::photon("B", 128, 0.5, 0.01);
  const Grid1D ga(256, 0.1);
  const MultiState atom =
      superpose({coherent_state(ga, 0.0, 10.0, 1.0, "A"), coherent_state(ga, 0.0, -10.0, 1.0, "A")}, {1.0, 1.0});
  const MultiState lab = prepare_resonant_lab_state(atom, ph, 1.0, 0.01, 137.0, 0.3, 1.0);
  const MultiState rest = apply_SD_inverse(lab, 0.3, 137.0, "C", "A", "B");
  const double sd = std::max(std::abs(rest.norm() - 1.0), std::abs(apply_SD(rest, 0.3, 137.0).norm() - 1.0));
  o.detail << ", S_D norm defect " << sd;
  o.require(sd <= 1e-3, "S_D norm 1e-3");

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> mass(0.3, 5.0), par(-3.0, 3.0);
  double defect = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const Masses m{{"A", mass(rng)}, {"B", mass(rng)}, {"C", mass(rng)}};
    const double t = par(rng), tau = par(rng);
    const Q gen = par(rng) * sym_product(Q::x("A"), Q::p("B")) + par(rng) * sym_product(Q::p("A"), Q::p("A")) +
                  par(rng) * Q::x("B");
    for (const PhaseSpaceMap& pm :
         {map_Sx(), map_Sp(), map_ST(t, tau, m), map_Sb(t, m), map_Sv(m), parity_map("A", "C"),
          velocity_parity_map("A", "C", m.at("A"), m.at("C")), generator_flow(gen, t)})
      defect = std::max(defect, symplectic_defect(pm));
  }
  o.detail << ", symplectic defect " << defect << " over 100 draws";
  o.require(defect <= 1e-12, "M^T Omega M = Omega to 1e-12");
}

// ---- 2 ----
void transitivity(Outcome& o) {
  // m_A dx_A = m_B dx_B, so the velocity-parity dilations of both paths land on the same grids
  const Masses ms{{"A", 1.5}, {"B", 1.5}, {"C", 0.5}};
  const Grid1D ga(64, 0.2), gb(64, 0.2);
  const double t = 0.7, tau = 0.2;
  using Op = std::function<MultiState(const MultiState&, const FrameRoles&)>;
  const std::vector<std::pair<std::string, Op>> ops = {
      {"S_x", [](const MultiState& s, const FrameRoles& r) { return apply_Sx(s, r); }},
      {"S_T", [&](const MultiState& s, const FrameRoles& r) { return apply_ST(s, t, tau, r); }},
      {"S_b", [&](const MultiState& s, const FrameRoles& r) { return apply_Sb(s, t, r); }},
  };
  for (const auto& [name, op] : ops) {
    double chain = 0.0, round = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const MultiState s = framed(random_smooth_state(pair_axes(ga, gb, 1.5, 1.5), seed, 3, 0.1, 2.5), "C", 0.5);
      const MultiState direct = op(s, roles("A", "B", "C"));
      const MultiState via = op(op(s, roles("B", "A", "C")), roles("A", "C", "B"));
      chain = std::max(chain, distance(direct, via));
      round = std::max(round, distance(op(direct, roles("C", "B", "A")), s));
    }
    o.detail << name << " chain " << chain << " round trip " << round << "; ";
    o.require(chain <= 1e-8 && round <= 1e-8, name + " 1e-8");
  }
}

// ---- 3 ----
void dense_oracle(Outcome& o) {
  struct Case {
    UnitaryKind kind;
    double dx_a, dx_b;
    Masses masses;
  };
  const Masses light{{"A", 1.0}, {"B", 1.0}, {"C", 2.0}}, heavy{{"A", 4.0}, {"B", 1.0}, {"C", 2.0}};
  const std::vector<Case> cases = {{UnitaryKind::Sx, 0.25, 0.5, light}, {UnitaryKind::Sp, 0.5, 0.25, light},
                                   {UnitaryKind::ST, 0.25, 0.5, light}, {UnitaryKind::Sb, 0.5, 0.25, heavy},
                                   {UnitaryKind::Sv, 0.5, 0.25, heavy}};
  for (const Case& c : cases) {
    MultiState lay = framed(tensor({sharp_state(Grid1D(16, c.dx_a), 0.0, "A", c.masses.at("A")),
                                    sharp_state(Grid1D(16, c.dx_b), 0.0, "B", c.masses.at("B"))}),
                            "C", c.masses.at("C"));
    QrfUnitary u;
    u.kind = c.kind;
    u.t = 0.1;
    u.masses = c.masses;
    const Eigen::MatrixXcd U = dense::dense_matrix(u, lay);
    const double unit = dense::unitarity_defect(U);
    const MultiState out = dense::layout_after(u, lay);
    const double conj = dense::check_conjugation(U, lay, out, *u.map(), dense::smooth_subspace(out, 2)).max_error;
    o.detail << u.name() << " " << unit << "/" << conj << "; ";
    o.require(unit <= 1e-8 && conj <= 1e-6, u.name());
  }

  const double c = 137.0, m = 1.0;
  const MultiState lay = from_amplitudes({Axis::continuous("C", Grid1D(16, 0.5), m), Axis::photon("B", 16, 1.0, 0.05)},
                                         CVec(256, 0.0), "A", m);
  QrfUnitary u;
  u.kind = UnitaryKind::SD;
  u.c = c;
  u.t = 0.1;
  u.roles = {"A", {"B"}, "C"};
  const Eigen::MatrixXcd U = dense::dense_matrix(u, lay);
  const MultiState out = dense::layout_after(u, lay);
  const Eigen::MatrixXcd image = U * dense::quadrature(lay, "B", false) * U.adjoint();
  const Eigen::MatrixXcd expect =
      dense::quadrature(out, "B", false) *
      dense::function_operator(out, {"A"}, {Rep::Momentum}, [&](const double* p) { return 1.0 / (1.0 - p[0] / (c * m)); });
  const double unit = dense::unitarity_defect(U);
  const double conj = dense::compressed_distance(image, expect, dense::smooth_subspace(out, 2));
  o.detail << "S_D " << unit << "/" << conj << " (unitarity/conjugation)";
  o.require(unit <= 1e-8 && conj <= 1e-6, "S_D");
}

// ---- 4 ----
void covariance(Outcome& o) {
  // the grid holds every branch and conditional shift through t = 1 with 7 sigma to spare
  const Grid1D g(128, 0.15);
  const Masses ms{{"A", 4.0}, {"B", 1.0}, {"C", 1.5}};
  const MultiState psi = framed(
      tensor({coherent_state(g, 0.5, 0.5, 0.8, "A", 4.0), coherent_state(g, 0.0, -0.3, 0.8, "B", 1.0)}), "C", 1.5);
  const HamiltonianSpec hc = free_hamiltonian({"A", "B"}, ms);
  // free propagation has no splitting error, so halving dt leaves the residual at this floor
  const double floor = 1e-9;
  auto check = [&](const std::string& name, UnitaryKind kind, const UnitaryFamily& fam) {
    QrfUnitary u;
    u.kind = kind;
    u.masses = ms;
    const HamiltonianSpec ha = transform_hamiltonian(u, hc);
    const double r1 = commuting_diagram_residual(fam, hc, ha, psi, 1.0, 2e-3);
    const double r2 = commuting_diagram_residual(fam, hc, ha, psi, 1.0, 1e-3);
    o.detail << name << " " << r1 << " -> " << r2 << "; ";
    o.require(r2 <= 1e-6, name + " residual 1e-6");
    o.require(r2 <= r1 / 3.0 || r2 <= floor, name + " dt^2 decay");
  };
  check("S_T", UnitaryKind::ST, [](const MultiState& s, double t) { return apply_ST(s, t, 0.0); });
  check("S_b", UnitaryKind::Sb, [](const MultiState& s, double t) { return apply_Sb(s, t); });

  QrfUnitary u;
  u.masses = ms;
  u.t = 0.9;
  u.kind = UnitaryKind::ST;
  const bool st = is_symmetry(u, free_form(), ms).symmetric;
  u.kind = UnitaryKind::Sb;
  const bool sb = is_symmetry(u, free_form(), ms).symmetric;
  u.kind = UnitaryKind::Sv;
  const bool sv_free = is_symmetry(u, free_form(), ms).symmetric;
  const bool sv_rel = is_symmetry(u, relative_velocity_form(), ms).symmetric;
  o.detail << std::boolalpha << "symmetric: S_T/free " << st << ", S_b/free " << sb << ", S_v/free " << sv_free
           << ", S_v/relative-velocity " << sv_rel;
  o.require(st && sb && !sv_free && sv_rel, "symmetry verdicts");
}

// ---- 5 ----
void fig3(Outcome& o) {
  const ScenarioConfig cfg = default_config();
  const double dxa = cfg.grid("A").dx, dxb = cfg.grid("B").dx;
  const ScenarioReport a = scenario("fig3-a");
  const double x0 = a.value("x0");
  o.detail << "a: shift " << a.value("shift_q_B") << " C peak " << a.value("C_peak") << "; ";
  o.require(std::abs(a.value("shift_q_B") + x0) <= dxb, "a shift");
  o.require(std::abs(a.value("C_peak") + x0) <= dxa && a.value("C_peak_weight") > 0.99, "a C localized");

  const ScenarioReport b = scenario("fig3-b");
  o.detail << "b: S " << b.value("entropy_in") << " -> " << b.value("entropy_out") << "; ";
  o.require(cfg.get("state.separation") == 16.0, "b separation 16 sigma");
  o.require(b.value("entropy_in") < 1e-8 && b.value("entropy_out") > 0.3, "b entropy");

  const ScenarioReport c = scenario("fig3-c");
  o.detail << "c: S " << c.value("entropy_in") << " -> " << c.value("entropy_out") << "; ";
  o.require(std::abs(c.value("entropy_in") - std::log(2.0)) < 1e-9 && c.value("entropy_out") < 0.01, "c entropy");

  const ScenarioReport d = scenario("fig3-d");
  o.detail << "d: <q_B> " << d.value("mean_q_B") << " X " << d.value("X") << " max/mean " << d.value("C_max_over_mean");
  o.require(std::abs(d.value("mean_q_B") - d.value("X")) <= dxb, "d q_B");
  o.require(d.value("C_max_over_mean") < 1.5, "d flat C");
}

// ---- 6 ----
void wep(Outcome& o) {
  const ScenarioReport r = scenario("wep");
  const double res = r.value("diagram_residual");
  o.detail << "diagram " << res << " (window " << r.value("localization_window") << "); ";
  o.require(r.verdicts.at("within_window"), "inside localization window");
  o.require(res <= 1e-3, "diagram 1e-3");
  for (const char* i : {"1", "2"}) {
    const double a = r.value(std::string("branch_acceleration_") + i), g = r.value(std::string("g_") + i);
    o.detail << "g_" << i << " " << g << " vs " << -a << "; ";
    o.require(std::abs(g + a) <= 0.01 * std::abs(a), std::string("g_") + i + " 1%");
  }

  const ScenarioReport lin = scenario("wep-linear");
  o.detail << "linear form distance " << lin.value("form_distance");
  o.require(lin.value("form_distance") == 0.0, "linear form exact");

  // term by term against (m_C/m_A) V(0) - (m_C/m_A) k q_C - (m_B/m_A) k q_B for V = k x
  const Masses ms{{"A", 2.0}, {"B", 3.0}, {"C", 5.0}};
  const double k = 0.7, v0 = 0.4;
  QrfUnitary u;
  u.kind = UnitaryKind::SEP;
  u.masses = ms;
  u.potential = Potential::linear(k, v0);
  HamiltonianSpec h = free_hamiltonian({"A", "B"}, ms);
  h.add(potential_term("A", *u.potential));
  const HamiltonianSpec he = transform_hamiltonian(u, h);
  Q expect = kinetic("B", 3.0) + kinetic("C", 5.0) - (5.0 / 2.0) * k * Q::x("C") - (3.0 / 2.0) * k * Q::x("B");
  expect.constant += (5.0 / 2.0) * v0;
  const double dist = coefficient_distance(he.quad, expect);
  o.detail << ", independent form distance " << dist;
  o.require(he.terms.empty() && dist < 1e-14, "linear form by hand");
}

// ---- 7 ----
void doppler(Outcome& o) {
  const ScenarioReport r = scenario("doppler");
  const double bin = default_config().get("photon.domega");
  for (const std::string tag : {"", "_single_branch"}) {
    const double d = std::abs(r.value("absorption_lab" + tag) - r.value("absorption_rest" + tag));
    o.detail << "absorption" << tag << " |lab - rest| " << d << "; ";
    o.require(d <= 1e-3, "absorption" + tag);
  }
  for (const char* i : {"1", "2"}) {
    const double w = r.value(std::string("omega_branch_") + i), e = r.value(std::string("omega_expected_") + i);
    o.detail << "omega_" << i << " " << w << " vs " << e << "; ";
    o.require(std::abs(w - e) <= bin, std::string("branch ") + i + " frequency");
  }
  o.detail << "round trip " << r.value("round_trip_fidelity");
  o.require(r.value("round_trip_fidelity") >= 1.0 - 1e-3, "round trip");
}

// ---- 8 ----
void measurement(Outcome& o) {
  const ScenarioReport r = scenario("measurement-invariance");
  o.detail << "Born " << r.value("born_residual") << ", invariance " << r.value("invariance_residual") << " over "
           << r.value("states") << " states";
  o.require(r.value("states") >= 10, "10 states");
  o.require(r.value("born_residual") <= 1e-8, "Born 1e-8");
  o.require(r.value("invariance_residual") <= 1e-6, "invariance 1e-6");
}

// ---- 9 ----
void conserved(Outcome& o) {
  const Masses ms{{"A", 2.0}, {"B", 1.0}, {"C", 0.5}};
  const Grid1D ga(64, 0.2), gb(64, 0.2);
  const std::map<std::string, std::string> swap{{"A", "C"}};
  const double t0 = 0.6, span = 0.5;
  auto G = [&](const std::string& l, double s) { return s * Q::p(l) - ms.at(l) * Q::x(l); };

  struct Case {
    std::string name;
    ConservedMapping map;
    std::function<MultiState(const MultiState&)> op;
    std::function<std::vector<Q>(double)> targets;  // target forms at time s
  };
  const std::vector<Case> cases = {
      {"S_T", map_conserved_set(map_ST(t0, 0.0, ms), {Q::p("A"), Q::p("B")}, swap),
       [&](const MultiState& s) { return apply_ST(s, t0, 0.0); },
       [&](double) { return std::vector<Q>{Q::p("C"), Q::p("B")}; }},
      {"S_b",
       map_conserved_set(map_Sb(t0, ms), {Q::p("A"), Q::p("B"), G("A", t0), G("B", t0)},
                         std::vector<Q>{Q::p("C"), Q::p("B"), G("C", t0), G("B", t0)}),
       [&](const MultiState& s) { return apply_Sb(s, t0); },
       [&](double s) { return std::vector<Q>{Q::p("C"), Q::p("B"), G("C", s), G("B", s)}; }},
  };
  QrfUnitary st;
  st.kind = UnitaryKind::ST;
  st.masses = ms;
  const HamiltonianSpec ha = transform_hamiltonian(st, free_hamiltonian({"A", "B"}, ms));
  for (const Case& c : cases) {
    o.require(c.map.ok && c.map.residual < 1e-12, c.name + " mapped set");
    double drift = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const MultiState psi = framed(random_smooth_state(pair_axes(ga, gb, 2.0, 1.0), seed, 3, 0.1, 2.5), "C", 0.5);
      const MultiState start = c.op(psi);
      const MultiState end = evolve(start, ha, span, 1e-2);
      const std::vector<Q> before = c.targets(t0), after = c.targets(t0 + span);
      for (std::size_t i = 0; i < before.size(); ++i)
        drift = std::max(drift, std::abs(expectation(end, after[i]) - expectation(start, before[i])) / span);
    }
    o.detail << c.name << " drift " << drift << "/unit time; ";
    o.require(drift <= 1e-8, c.name + " drift 1e-8");
  }
  const NaiveRelativeReport naive = naive_relative_map(3, {1.0, 1.0, 1.0});
  o.detail << "naive N=3 defect " << naive.defect;
  o.require(!naive.canonical, "naive N=3 flagged");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    void (*run)(Outcome&);
  };
  const Criterion all[] = {
      {1, "unitarity/canonicity", 5, unitarity_canonicity},
      {2, "transitivity", 10, transitivity},
      {3, "dense oracle", 20, dense_oracle},
      {4, "covariance/symmetry", 30, covariance},
      {5, "fig3 reproduction", 15, fig3},
      {6, "WEP", 60, wep},
      {7, "Doppler", 30, doppler},
      {8, "measurement", 20, measurement},
      {9, "conserved quantities", 10, conserved},
  };
  int failed = 0;
  for (const Criterion& c : all) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_s) {
      o.ok = false;
      o.detail << " [over time budget]";
    }
    if (!o.ok) ++failed;
    std::printf("criterion %d %-22s %s  (%.2f s / %.0f s)  %s\n", c.id, c.name, o.ok ? "PASS" : "FAIL", secs, c.limit_s,
                o.detail.str().c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

#include "qrf/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <tuple>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include "json.hpp"

#include "qrf/dense.hpp"
#include "qrf/dynamics.hpp"
#include "qrf/kernels.hpp"
#include "qrf/operators.hpp"
#include "qrf/phase_space.hpp"

namespace fs = std::filesystem;

namespace qrf {

void ScenarioReport::metric(const std::string& name, double value, const std::string& source) {
  metrics[name] = Metric{value, source};
}

void ScenarioReport::verdict(const std::string& name, bool ok) { verdicts[name] = ok; }

double ScenarioReport::value(const std::string& name) const {
  const auto it = metrics.find(name);
  if (it == metrics.end()) throw std::out_of_range("report has no metric '" + name + "'");
  return it->second.value;
}

bool ScenarioReport::passed() const {
  for (const auto& [k, v] : verdicts)
    if (!v) return false;
  return true;
}

// ---------------- emission ----------------

namespace {

std::string num(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  return f;
}

}  // namespace

void emit_csv(const MultiState& s, const std::string& label, const std::string& path) {
  MultiState w = s;
  if (w.axis(label).kind == AxisKind::Continuous) set_rep(w, {label}, Rep::Position);
  const Axis& a = w.axis(label);
  const Eigen::MatrixXcd rho = reduced_density(w, {label});
  const int n = a.dim();
  std::vector<cplx> amp(n);
  std::vector<double> prob(n);
  const double pur = purity(rho);
  if (pur > 1.0 - 1e-10) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    Eigen::VectorXcd v = es.eigenvectors().col(n - 1);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v *= std::conj(v(imax)) / std::abs(v(imax));
    for (int k = 0; k < n; ++k) {
      amp[k] = v(k);
      prob[k] = std::norm(v(k));
    }
  } else {
    for (int k = 0; k < n; ++k) {
      prob[k] = std::max(0.0, rho(k, k).real());
      amp[k] = std::sqrt(prob[k]);
    }
  }
  const double meas = a.measure();
  std::ofstream f = open_out(path);
  f << "coordinate,re,im,abs2\n";
  for (int k = 0; k < n; ++k) {
    const cplx psi = amp[k] / std::sqrt(meas);
    f << num(a.coord(k)) << ',' << num(psi.real()) << ',' << num(psi.imag()) << ',' << num(prob[k] / meas) << '\n';
  }
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void emit_distribution_csv(const OutcomeDistribution& d, double bin, const std::string& path) {
  std::ofstream f = open_out(path);
  f << "coordinate,re,im,abs2\n";
  for (std::size_t k = 0; k < d.outcome.size(); ++k) {
    const double dens = d.probability[k] / bin;
    f << num(d.outcome[k]) << ',' << num(std::sqrt(std::max(0.0, dens))) << ",0," << num(dens) << '\n';
  }
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

std::string report_json(const ScenarioReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.scenario;
  j["verdicts"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.verdicts) j["verdicts"][k] = v;
  j["metrics"] = nlohmann::ordered_json::object();
  for (const auto& [k, m] : r.metrics) {
    nlohmann::ordered_json e;
    if (std::isfinite(m.value))
      e["value"] = std::stod(num(m.value));
    else
      e["value"] = nullptr;
    e["source"] = m.source;
    j["metrics"][k] = e;
  }
  j["files"] = r.files;
  j["config_echo"] = r.config_echo;
  return j.dump(2) + "\n";
}

void emit_json(const ScenarioReport& r, const std::string& path) {
  std::ofstream f = open_out(path);
  f << report_json(r);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------- scenarios ----------------

namespace {

struct Ctx {
  const ScenarioConfig& cfg;
  std::string out;
  ScenarioReport& rep;
  std::string prefix;

  void save(const MultiState& s, const std::string& label) const {
    if (out.empty()) return;
    const std::string name = rep.scenario + "_" + s.frame + "_" + label + ".csv";
    emit_csv(s, label, (fs::path(out) / name).string());
    rep.files.push_back(name);
  }
  void save_dist(const OutcomeDistribution& d, double bin, const std::string& tag) const {
    if (out.empty()) return;
    const std::string name = rep.scenario + "_" + tag + ".csv";
    emit_distribution_csv(d, bin, (fs::path(out) / name).string());
    rep.files.push_back(name);
  }
  void save_text(const std::string& text, const std::string& tag) const {
    if (out.empty()) return;
    const std::string name = rep.scenario + "_" + tag + ".txt";
    std::ofstream f = open_out((fs::path(out) / name).string());
    f << text;
    rep.files.push_back(name);
  }
  void metric(const std::string& n, double v, const std::string& src) const { rep.metric(prefix + n, v, src); }
  void verdict(const std::string& n, bool ok) const { rep.verdict(prefix + n, ok); }
};

Masses masses_of(const ScenarioConfig& c) {
  return {{"A", c.mass("A")}, {"B", c.mass("B")}, {"C", c.mass("C")}};
}

MultiState in_lab(MultiState s, double frame_mass) {
  s.frame = "C";
  s.frame_mass = frame_mass;
  return s;
}

double snap(const Grid1D& g, double x) { return std::round(x / g.dx) * g.dx; }

MultiState coherent(const ScenarioConfig& c, const std::string& l, double x0, double p0, double sigma) {
  return coherent_state(c.grid(l), x0, p0, sigma, l, c.mass(l));
}

// normalized conditional state with the coordinate of `label` restricted to one sign
MultiState condition_sign(const MultiState& s, const std::string& label, int sign, Rep rep = Rep::Position) {
  MultiState w = s;
  set_rep(w, {label}, rep);
  multiply_factor(w, {label}, [sign](const double* c) { return cplx((sign < 0 ? c[0] < 0.0 : c[0] > 0.0) ? 1.0 : 0.0); });
  restore_reps(w, s);
  return normalized(w);
}

// slope of the least-squares line through (t, y)
double fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  double st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    st += t[k];
    sy += y[k];
    stt += t[k] * t[k];
    sty += t[k] * y[k];
  }
  return (n * sty - st * sy) / (n * stt - st * st);
}

// ---- fig3 ----

void fig3_case(Ctx& x, const std::string& c) {
  const auto& cfg = x.cfg;
  const Grid1D ga = cfg.grid("A"), gb = cfg.grid("B");
  const double mC = cfg.mass("C");
  const double sigma = cfg.get("state.sigma");
  const double half = 0.5 * cfg.get("state.separation") * sigma;
  MultiState psi;
  if (c == "a") {
    const double x0 = snap(ga, cfg.get("state.x0"));
    psi = in_lab(tensor({sharp_state(ga, x0, "A", cfg.mass("A")), coherent(cfg, "B", 0.0, cfg.get("state.p0"), sigma)}),
                 mC);
    const MultiState out = apply_Sx(psi);
    const double shift = mean_x(out, "B") - mean_x(psi, "B");
    const auto mc = marginal(out, "C");
    const int kmax = static_cast<int>(std::max_element(mc.begin(), mc.end()) - mc.begin());
    const double cpeak = out.axis("C").coord(kmax);
    x.metric("x0", x0, "config (snapped to grid)");
    x.metric("shift_q_B", shift, "apply_Sx; mean_x(B)");
    x.metric("C_peak", cpeak, "apply_Sx; marginal(C)");
    x.metric("C_peak_weight", mc[kmax], "apply_Sx; marginal(C)");
    x.verdict("q_B_shift_is_minus_x0", std::abs(shift + x0) <= gb.dx);
    x.verdict("C_localized_at_minus_x0", std::abs(cpeak + x0) <= ga.dx && mc[kmax] > 0.99);
    x.save(psi, "A");
    x.save(psi, "B");
    x.save(out, "B");
    x.save(out, "C");
  } else if (c == "b") {
    const MultiState a = superpose({coherent(cfg, "A", -half, 0.0, sigma), coherent(cfg, "A", half, 0.0, sigma)},
                                   {1.0, 1.0});
    psi = in_lab(tensor({a, coherent(cfg, "B", 0.0, cfg.get("state.p0"), sigma)}), mC);
    const MultiState out = apply_Sx(psi);
    const double s_in = schmidt_entropy(psi, {"A"});
    const double s_out = schmidt_entropy(out, {"B"});
    x.metric("entropy_in", s_in, "schmidt_entropy(A|B), C frame");
    x.metric("entropy_out", s_out, "apply_Sx; schmidt_entropy(B|C), A frame");
    x.verdict("input_product", s_in < 1e-8);
    x.verdict("output_entangled", s_out > 0.3);
    x.save(psi, "A");
    x.save(psi, "B");
    x.save(out, "B");
    x.save(out, "C");
  } else if (c == "c") {
    const double X = snap(gb, cfg.get("state.X"));
    const double a1 = snap(ga, -half), a2 = snap(ga, half);
    const double mA = cfg.mass("A"), mB = cfg.mass("B");
    psi = in_lab(superpose({tensor({sharp_state(ga, a1, "A", mA), sharp_state(gb, snap(gb, a1 + X), "B", mB)}),
                            tensor({sharp_state(ga, a2, "A", mA), sharp_state(gb, snap(gb, a2 + X), "B", mB)})},
                           {1.0, 1.0}),
                 mC);
    const MultiState out = apply_Sx(psi);
    const double s_in = schmidt_entropy(psi, {"A"});
    const double s_out = schmidt_entropy(out, {"B"});
    x.metric("entropy_in", s_in, "schmidt_entropy(A|B), C frame");
    x.metric("entropy_out", s_out, "apply_Sx; schmidt_entropy(B|C), A frame");
    x.metric("mean_q_B", mean_x(out, "B"), "apply_Sx; mean_x(B)");
    x.verdict("input_ln2", std::abs(s_in - std::log(2.0)) < 1e-9);
    x.verdict("output_product", s_out < 0.01);
    x.verdict("q_B_is_X", std::abs(mean_x(out, "B") - X) <= gb.dx);
    x.save(psi, "A");
    x.save(psi, "B");
    x.save(out, "B");
    x.save(out, "C");
  } else if (c == "d") {
    if (std::abs(ga.dx - gb.dx) > 1e-12 * ga.dx) throw std::invalid_argument("fig3 case d needs grid.A.dx == grid.B.dx");
    const double X = snap(gb, cfg.get("state.X"));
    const int shift = static_cast<int>(std::lround(X / gb.dx));
    const double W = 0.3 * ga.length();
    std::vector<Axis> axes{Axis::continuous("A", ga, cfg.mass("A")), Axis::continuous("B", gb, cfg.mass("B"))};
    CVec amp(static_cast<std::size_t>(ga.n) * gb.n, 0.0);
    for (int i = 0; i < ga.n; ++i) {
      const int j = ((i + (gb.n - ga.n) / 2 + shift) % gb.n + gb.n) % gb.n;
      amp[static_cast<std::size_t>(i) * gb.n + j] = std::exp(-std::pow(ga.x(i) / W, 8));
    }
    psi = normalized(from_amplitudes(axes, amp, "C", mC));
    const MultiState out = apply_Sx(psi);
    const auto mc = marginal(out, "C");
    const Axis& ac = out.axis("C");
    double mx = 0.0, mean = 0.0;
    int cnt = 0;
    for (int k = 0; k < ac.dim(); ++k) {
      if (std::abs(ac.coord(k)) > 0.25 * ac.grid.length()) continue;
      mx = std::max(mx, mc[k]);
      mean += mc[k];
      ++cnt;
    }
    mean /= cnt;
    const double qb = mean_x(out, "B");
    x.metric("mean_q_B", qb, "apply_Sx; mean_x(B)");
    x.metric("X", X, "config (snapped to grid)");
    x.metric("C_max_over_mean", mx / mean, "apply_Sx; marginal(C) over the central half");
    x.metric("entropy_out", schmidt_entropy(out, {"B"}), "apply_Sx; schmidt_entropy(B|C)");
    x.verdict("q_B_is_X", std::abs(qb - X) <= gb.dx);
    x.verdict("C_flat", mx / mean < 1.5);
    x.save(psi, "A");
    x.save(psi, "B");
    x.save(out, "B");
    x.save(out, "C");
  } else {
    throw std::invalid_argument("fig3: unknown case '" + c + "' (a, b, c, d or all)");
  }
}

void run_fig3(Ctx& x, std::string c) {
  if (c == "all") {
    for (const char* k : {"a", "b", "c", "d"}) {
      Ctx sub = x;
      sub.prefix = std::string(k) + ".";
      fig3_case(sub, k);
    }
    return;
  }
  fig3_case(x, c);
}

// ---- covariance scenarios ----

MultiState two_packets(const ScenarioConfig& cfg) {
  const double sigma = cfg.get("state.sigma"), x0 = cfg.get("state.x0");
  return in_lab(tensor({coherent(cfg, "A", x0, cfg.get("state.p0"), sigma), coherent(cfg, "B", -x0, 0.0, sigma)}),
                cfg.mass("C"));
}

void diagram(Ctx& x, const QrfUnitary& u, const UnitaryFamily& fam, const HamiltonianSpec& hs, const MultiState& psi0) {
  const double t = x.cfg.get("evolution.t"), dt = x.cfg.get("evolution.dt");
  const HamiltonianSpec ht = transform_hamiltonian(u, hs);
  const double r1 = commuting_diagram_residual(fam, hs, ht, psi0, t, dt);
  const double r2 = commuting_diagram_residual(fam, hs, ht, psi0, t, 0.5 * dt);
  x.metric("diagram_residual", r1, "commuting_diagram_residual(dt)");
  x.metric("diagram_residual_half_dt", r2, "commuting_diagram_residual(dt/2)");
  x.verdict("diagram_residual", r1 <= 1e-6);
  // second order, unless both already sit at round-off
  x.verdict("diagram_dt2_decay", r2 <= 0.3 * r1 || std::max(r1, r2) < 1e-10);
}

void run_translation_symmetry(Ctx& x) {
  const auto& cfg = x.cfg;
  QrfUnitary u;
  u.kind = UnitaryKind::ST;
  u.t = cfg.get("evolution.t");
  u.tau = cfg.get("evolution.tau");
  u.masses = masses_of(cfg);
  const SymmetryReport sym = is_symmetry(u, free_form(), u.masses);
  x.metric("symmetry_distance", sym.distance, "is_symmetry(S_T, free)");
  x.verdict("free_is_symmetric", sym.symmetric);
  const MultiState psi = two_packets(cfg);
  const double tau = u.tau;
  diagram(x, u, [tau](const MultiState& s, double t) { return apply_ST(s, t, tau); },
          free_hamiltonian({"A", "B"}, u.masses, "C"), psi);
  const MultiState out = apply(u, psi);
  x.metric("mean_q_B", mean_x(out, "B"), "apply_ST; mean_x(B)");
  x.metric("mean_q_C", mean_x(out, "C"), "apply_ST; mean_x(C)");
  x.save_text("H_A = " + sym.transformed + "\nexpected " + sym.expected + "\n", "forms");
  x.save(psi, "A");
  x.save(psi, "B");
  x.save(out, "B");
  x.save(out, "C");
}

void run_boost_superposition(Ctx& x) {
  const auto& cfg = x.cfg;
  const Masses m = masses_of(cfg);
  const double t = cfg.get("evolution.t");
  QrfUnitary u;
  u.kind = UnitaryKind::Sb;
  u.t = t;
  u.masses = m;
  const SymmetryReport sym = is_symmetry(u, free_form(), m);
  x.metric("symmetry_distance", sym.distance, "is_symmetry(S_b, free)");
  x.verdict("free_is_symmetric", sym.symmetric);
  diagram(x, u, [](const MultiState& s, double tt) { return apply_Sb(s, tt); }, free_hamiltonian({"A", "B"}, m, "C"),
          two_packets(cfg));

  // A in a superposition of two momenta
  const double p1 = cfg.get("state.p1"), p2 = cfg.get("state.p2");
  const double hb = cfg.hbar();
  // momentum branches 16 sigma apart when the A grid can hold the packet, else as far as it allows
  const double sx = std::min(hb * cfg.get("state.separation") / (2.0 * std::abs(p1 - p2)), cfg.grid("A").length() / 16.0);
  x.metric("momentum_separation_sigmas", std::abs(p1 - p2) * 2.0 * sx / hb, "branch spacing over momentum width");
  const double sigma = cfg.get("state.sigma");
  const MultiState a = superpose({coherent(cfg, "A", 0.0, p1, sx), coherent(cfg, "A", 0.0, p2, sx)}, {1.0, 1.0});
  const MultiState psi = in_lab(tensor({a, coherent(cfg, "B", 0.0, 0.0, sigma)}), cfg.mass("C"));
  const MultiState out = apply(u, psi);
  const double s_in = schmidt_entropy(psi, {"A"}), s_out = schmidt_entropy(out, {"B"});
  x.metric("entropy_in", s_in, "schmidt_entropy(A|B), C frame");
  x.metric("entropy_out", s_out, "apply_Sb; schmidt_entropy(B|C), A frame");
  x.verdict("boost_superposition_entangles", s_in < 1e-8 && s_out > 0.1);
  x.save(psi, "A");
  x.save(psi, "B");
  x.save(out, "B");
  x.save(out, "C");

  // A in a momentum eigenstate: B sees one classical boost
  const Grid1D ga = cfg.grid("A");
  const int j = static_cast<int>(std::lround(p1 / ga.dp())) + ga.n / 2;
  Axis ax = Axis::continuous("A", ga, m.at("A"));
  ax.rep = Rep::Momentum;
  CVec amp(ga.n, 0.0);
  amp.at(j) = 1.0;
  const MultiState eig = in_lab(tensor({from_amplitudes({ax}, amp), coherent(cfg, "B", 0.0, 0.0, sigma)}), m.at("C"));
  const MultiState eo = apply(u, eig);
  const double v = ga.p(j) / m.at("A");
  const MultiState b0 = coherent(cfg, "B", 0.0, 0.0, sigma);
  const MultiState expect = classical_oracle(ClassicalKind::Boost, ClassicalParams{0.0, v, t, 0.0}, b0, "B");
  const Eigen::MatrixXcd rho = reduced_density(all_position(eo), {"B"});
  const Eigen::VectorXcd e = dense::as_eigen(all_position(expect));
  const double f = (e.adjoint() * rho * e)(0, 0).real();
  x.metric("eigenstate_velocity", v, "grid momentum of A / m_A");
  x.metric("eigenstate_boost_fidelity", f, "apply_Sb vs classical_oracle(Boost)");
  x.metric("eigenstate_entropy", schmidt_entropy(eo, {"B"}), "apply_Sb; schmidt_entropy(B|C)");
  x.verdict("eigenstate_reduces_to_classical_boost", f >= 1.0 - 1e-8);

  // sharp two-momentum superposition: orthogonal C branches, ln 2 between B and C
  const int j2 = static_cast<int>(std::lround(p2 / ga.dp())) + ga.n / 2;
  CVec amp2(ga.n, 0.0);
  amp2.at(j) = 1.0 / std::sqrt(2.0);
  amp2.at(j2) = 1.0 / std::sqrt(2.0);
  const MultiState sharp = in_lab(tensor({from_amplitudes({ax}, amp2), b0}), m.at("C"));
  const double s_sharp = schmidt_entropy(apply(u, sharp), {"B"});
  x.metric("sharp_entropy_out", s_sharp, "apply_Sb on two momentum eigenstates; schmidt_entropy(B|C)");
  x.verdict("sharp_superposition_ln2", j != j2 && std::abs(s_sharp - std::log(2.0)) <= 1e-3);
}

void run_relvel(Ctx& x) {
  const auto& cfg = x.cfg;
  QrfUnitary u;
  u.kind = UnitaryKind::Sv;
  u.masses = masses_of(cfg);
  const SymmetryReport a = is_symmetry(u, free_form(), u.masses);
  const SymmetryReport b = is_symmetry(u, relative_velocity_form(), u.masses);
  x.metric("free_distance", a.distance, "is_symmetry(S_v, free)");
  x.metric("relative_velocity_distance", b.distance, "is_symmetry(S_v, relative-velocity H)");
  x.verdict("free_not_symmetric", !a.symmetric);
  x.verdict("relative_velocity_symmetric", b.symmetric);
  x.save_text("free: " + a.transformed + "\n  expected " + a.expected + "\nrelative velocity: " + b.transformed +
                  "\n  expected " + b.expected + "\n",
              "forms");
  const MultiState psi = two_packets(cfg);
  const MultiState out = apply(u, psi);
  x.metric("norm_defect", std::abs(out.norm() - 1.0), "apply_Sv");
  x.save(out, "B");
  x.save(out, "C");
}

// ---- WEP ----

void run_wep(Ctx& x) {
  const auto& cfg = x.cfg;
  const Masses m = masses_of(cfg);
  const double mA = m.at("A"), mB = m.at("B");
  const double a1 = cfg.get("wep.a1"), a2 = cfg.get("wep.a2");
  const double t = cfg.get("wep.t"), dt = cfg.get("evolution.dt");
  const double sigma = cfg.get("state.sigma");
  const double half = 0.5 * cfg.get("state.separation") * sigma;
  const Potential v = Potential::piecewise_linear({0.0}, {-mA * a1, -mA * a2});
  x.verdict("masses_consistent", std::abs(m.at("A") - m.at("C")) <= 1e-12 * mA);

  const MultiState a = superpose({coherent(cfg, "A", -half, 0.0, sigma), coherent(cfg, "A", half, 0.0, sigma)},
                                 {1.0, 1.0});
  const MultiState psi0 = in_lab(tensor({a, coherent(cfg, "B", 0.0, cfg.get("state.p0"), sigma)}), m.at("C"));

  const AccelerationCheck acc = acceleration_superposition_check(v, a, mA);
  for (std::size_t i = 0; i < acc.accelerations.size(); ++i)
    x.metric("branch_acceleration_" + std::to_string(i + 1), acc.accelerations[i], "acceleration_superposition_check");
  x.metric("acceleration_residual", acc.residual, "acceleration_superposition_check");

  double window = INFINITY;
  for (double c : {-half, half})
    window = std::min(window, localization_window(v, Branch{c, 0.0, sigma, mA, cfg.hbar()}, 1e3));
  x.metric("localization_window", window, "localization_window (min over branches)");
  x.verdict("within_window", t <= window);

  QrfUnitary u;
  u.kind = UnitaryKind::SEP;
  u.t = t;
  u.masses = m;
  u.potential = v;
  u.dt = dt;
  HamiltonianSpec hs = free_hamiltonian({"A", "B"}, m, "C");
  hs.add(potential_term("A", v));
  const HamiltonianSpec ha = transform_hamiltonian(u, hs);
  SEPOptions opt;
  opt.dt = dt;
  const UnitaryFamily fam = [&](const MultiState& s, double tt) { return apply_SEP(s, tt, v, {}, opt); };
  const MultiState lab_t = evolve(psi0, hs, t, dt);
  const MultiState via_lab = fam(lab_t, t);
  const MultiState psiA0 = fam(psi0, 0.0);
  const MultiState via_a = evolve(psiA0, ha, t, dt);
  const double res = distance(via_lab, via_a);
  x.metric("diagram_residual", res, "apply_SEP after evolve(H_C) vs evolve(transformed H) after apply_SEP(0)");
  x.verdict("diagram_residual", res <= 1e-3);

  // conditional drift of pi_B on each side of C
  const int steps = 4;
  std::vector<double> ts, pl, pr;
  MultiState w = psiA0;
  for (int k = 0; k <= steps; ++k) {
    if (k > 0) w = evolve(w, ha, t / steps, dt);
    ts.push_back(k * t / steps);
    pl.push_back(mean_p(condition_sign(w, "C", -1), "B"));
    pr.push_back(mean_p(condition_sign(w, "C", +1), "B"));
  }
  // C on the negative side <-> A on the positive side (slope region 2)
  const double g2 = fit_slope(ts, pl) / mB, g1 = fit_slope(ts, pr) / mB;
  x.metric("g_1", g1, "slope of conditional mean_p(B), q_C > 0, under transformed H");
  x.metric("g_2", g2, "slope of conditional mean_p(B), q_C < 0, under transformed H");
  x.verdict("g_1_is_minus_a_1", std::abs(g1 + a1) <= 0.01 * std::abs(a1));
  x.verdict("g_2_is_minus_a_2", std::abs(g2 + a2) <= 0.01 * std::abs(a2));
  x.save(lab_t, "A");
  x.save(lab_t, "B");
  x.save(via_a, "B");
  x.save(via_a, "C");
}

void run_wep_linear(Ctx& x) {
  const auto& cfg = x.cfg;
  const Masses m = masses_of(cfg);
  const double a = cfg.get("wep.a");
  const Potential v = Potential::linear(-m.at("A") * a);
  QrfUnitary u;
  u.kind = UnitaryKind::SEP;
  u.t = cfg.get("evolution.t");
  u.masses = m;
  u.potential = v;
  HamiltonianSpec hs = free_hamiltonian({"A", "B"}, m, "C");
  hs.add(potential_term("A", v));
  const HamiltonianSpec ha = transform_hamiltonian(u, hs);
  // classical WEP: uniform field g = -a acting on every system seen from A
  QuadObservable expect = kinetic("B", m.at("B")) + kinetic("C", m.at("C"));
  expect = expect + (m.at("B") * a) * QuadObservable::x("B") + (m.at("C") * a) * QuadObservable::x("C");
  const double d = ha.terms.empty() ? coefficient_distance(ha.quad, expect) : INFINITY;
  x.metric("form_distance", d, "transform_hamiltonian(S_EP, linear V) vs uniform-field H");
  x.verdict("classical_form_exact", d <= 1e-12);
  x.save_text("H_A = " + format_observable(ha.quad, true) + "\nexpected " + format_observable(expect, true) + "\n",
              "forms");

  const double t = cfg.get("evolution.t"), dt = cfg.get("evolution.dt");
  const MultiState psi0 = two_packets(cfg);
  SEPOptions opt;
  opt.dt = dt;
  const UnitaryFamily fam = [&](const MultiState& s, double tt) { return apply_SEP(s, tt, v, {}, opt); };
  const double res = commuting_diagram_residual(fam, hs, ha, psi0, t, dt);
  x.metric("diagram_residual", res, "commuting_diagram_residual(S_EP, linear V)");
  x.verdict("diagram_residual", res <= 1e-3);
}

double trotter_error(const Potential& v, double mass, double dt, const Grid1D& g) {
  MultiState lay = sharp_state(g, 0.0, "A", mass);
  const Eigen::MatrixXcd X = dense::quadrature(lay, "A", false), P = dense::quadrature(lay, "A", true);
  const Eigen::MatrixXcd Vx = dense::function_operator(lay, {"A"}, {Rep::Position}, [&](const double* c) { return v.value(c[0]); });
  const Eigen::MatrixXcd H = P * P / (2.0 * mass) + Vx;
  const Eigen::MatrixXcd U = dense::expi(H, -dt, g.hbar);
  const Eigen::MatrixXcd Xt = U.adjoint() * X * U;
  const TrotterDisplacement td = trotter_XA(v, dt, mass, 1.0, 1.0, 1.0);
  const Eigen::MatrixXcd D = dense::function_operator(lay, {"A"}, {Rep::Position},
                                                      [&](const double* c) { return td.displacement(c[0], 0.0); });
  const Eigen::MatrixXcd T = X + td.linear_part.lin(1) * P + D;
  return dense::compressed_distance(Xt, T, dense::smooth_subspace(lay, 2));
}

void run_wep_trotter(Ctx& x) {
  const auto& cfg = x.cfg;
  const double k = cfg.get("wep.k"), c0 = cfg.get("state.x0");
  const double mass = cfg.mass("A");
  const Potential v = Potential::general([=](double y) { return 0.25 * k * std::pow(y - c0, 4); },
                                         [=](double y) { return k * std::pow(y - c0, 3); },
                                         [=](double y) { return 3.0 * k * std::pow(y - c0, 2); }, "quartic");
  const Grid1D g(64, 0.25, cfg.hbar());
  std::vector<double> dts{0.08, 0.04, 0.02}, err;
  for (double dt : dts) err.push_back(trotter_error(v, mass, dt, g));
  for (std::size_t i = 0; i < dts.size(); ++i) x.metric("error_dt_" + num(dts[i]), err[i], "dense Heisenberg X(dt) vs trotter_XA");
  const double order = std::log2(err[1] / err[2]);
  x.metric("order", order, "log2 of successive error ratio");
  x.metric("bound_dt_0.02", trotter_XA(v, 0.02, mass, 1.0, 1.0, 1.0).error_bound, "trotter_XA");
  x.verdict("third_order", order > 2.5 && order < 3.5);
}

void run_canonicity_naive(Ctx& x) {
  const auto& cfg = x.cfg;
  const NaiveRelativeReport r3 = naive_relative_map(3, {cfg.mass("A"), cfg.mass("B"), cfg.mass("C")});
  const NaiveRelativeReport r2 = naive_relative_map(2, {cfg.mass("A"), cfg.mass("B")});
  x.metric("defect_N3", r3.defect, "naive_relative_map(3)");
  x.metric("defect_N2", r2.defect, "naive_relative_map(2)");
  x.verdict("N3_flagged_non_canonical", !r3.canonical);
  x.verdict("N2_canonical", r2.canonical);
  std::string txt;
  for (const auto& o : r3.offending) txt += o + "\n";
  x.save_text(txt, "offending");
}

void run_print_map(Ctx& x) {
  const auto& cfg = x.cfg;
  const Masses m = masses_of(cfg);
  const double t = cfg.get("evolution.t"), tau = cfg.get("evolution.tau");
  const std::vector<std::pair<std::string, PhaseSpaceMap>> maps{
      {"S_x", map_Sx()}, {"S_p", map_Sp()}, {"S_T", map_ST(t, tau, m)}, {"S_b", map_Sb(t, m)}, {"S_v", map_Sv(m)}};
  std::string txt;
  for (const auto& [name, pm] : maps) {
    txt += name + "\n" + print_map(pm) + "\n";
    x.metric(name + "_symplectic_defect", symplectic_defect(pm), "symplectic_defect");
    x.verdict(name + "_canonical", is_canonical(pm));
  }
  x.save_text(txt, "maps");
}

// ---- Doppler ----

void run_doppler(Ctx& x) {
  const auto& cfg = x.cfg;
  const double c = cfg.c(), hb = cfg.hbar(), t = cfg.get("evolution.t");
  const double mA = cfg.mass("A"), mC = cfg.mass("C");
  const double wb = cfg.get("photon.omega_b"), sw = cfg.get("photon.sigma");
  const double v1 = cfg.get("photon.v1"), v2 = cfg.get("photon.v2");
  const Axis ph = Axis::photon("B", cfg.get_int("photon.n"), cfg.get("photon.omega0"), cfg.get("photon.domega"));
  const double sx = hb / (2.0 * cfg.get("photon.sigma_p"));
  const MultiState atom =
      superpose({coherent(cfg, "A", 0.0, mA * v1, sx), coherent(cfg, "A", 0.0, mA * v2, sx)}, {1.0, 1.0});
  const MultiState lab = prepare_resonant_lab_state(atom, ph, wb, sw, c, t, mC, "At", hb * wb);
  const MultiState rest = apply_SD_inverse(lab, t, c, "C", "A", "B");
  const MultiState back = apply_SD(rest, t, c, "C", "A", "B");
  const double fid = fidelity(back, lab);
  x.metric("round_trip_fidelity", fid, "apply_SD(apply_SD_inverse(lab))");
  x.verdict("round_trip", fid >= 1.0 - 1e-3);
  x.metric("lab_mass", mC, "config");

  AbsorptionModel am;
  am.delta_e = hb * wb;
  am.window = cfg.get("photon.window");
  am.c = c;
  am.hbar = hb;
  // photon Doppler-matched to every atom momentum, and a lab photon tuned to branch 1 only
  MultiState tuned = tensor({atom, photon_packet(ph, wb * (1.0 - v1 / c), sw),
                             from_amplitudes({two_level_axis("At", hb * wb)}, {1.0, 0.0})});
  tuned = in_lab(tuned, mC);
  const MultiState tuned_rest = apply_SD_inverse(tuned, t, c, "C", "A", "B");
  for (const auto& [tag, l, r] : std::vector<std::tuple<std::string, const MultiState*, const MultiState*>>{
           {"", &lab, &rest}, {"_single_branch", &tuned, &tuned_rest}}) {
    const double pl = absorption_probability("C", *l, am), pr = absorption_probability("A", *r, am);
    x.metric("absorption_lab" + tag, pl, "absorption_probability(lab frame)");
    x.metric("absorption_rest" + tag, pr, "absorption_probability(rest frame, apply_SD_inverse)");
    x.verdict("absorption_invariant" + tag, std::abs(pl - pr) <= 1e-3);
  }
  x.verdict("resonant_absorbs", x.rep.value("absorption_lab") > 0.99);

  // photon frequency per velocity branch in the lab
  for (const auto& [name, vel] : std::vector<std::pair<std::string, double>>{{"1", v1}, {"2", v2}}) {
    const MultiState br = condition_sign(lab, "A", vel > 0 ? 1 : -1, Rep::Momentum);
    const auto mw = marginal(br, "B");
    double w = 0.0;
    for (int k = 0; k < ph.dim(); ++k) w += mw[k] * ph.omega(k);
    const double expect = wb * (1.0 - vel / c);
    x.metric("omega_branch_" + name, w, "marginal(B) conditioned on the sign of p_A");
    x.metric("omega_expected_" + name, expect, "omega_B (1 - v/c)");
    x.verdict("branch_" + name + "_frequency", std::abs(w - expect) <= ph.domega);
  }
  const MultiState pk = photon_packet(ph, wb, sw);
  const Eigen::MatrixXcd rho = reduced_density(rest, {"B"});
  const Eigen::VectorXcd e = dense::as_eigen(pk);
  const double fp = (e.adjoint() * rho * e)(0, 0).real();
  x.metric("rest_photon_fidelity", fp, "reduced_density(B) in the rest frame vs photon_packet(omega_B)");
  x.verdict("rest_photon_resonant", fp >= 1.0 - 1e-3);
  x.save(lab, "A");
  x.save(lab, "B");
  x.save(rest, "C");
  x.save(rest, "B");
}

// ---- measurement ----

void run_measurement_invariance(Ctx& x) {
  const auto& cfg = x.cfg;
  const Grid1D ga = cfg.grid("A"), gb = cfg.grid("B");
  MeasurementModel model;
  model.observable = QuadObservable::x("B") - QuadObservable::x("A");
  model.frame = "C";
  model.pointer_width = cfg.get("measurement.pointer_width");
  model.apparatus = "M";
  model.apparatus_grid = cfg.grid("M");
  model.apparatus_mass = cfg.mass("M");
  model.apparatus_x0 = cfg.get("measurement.apparatus_x0");
  model.apparatus_sigma = cfg.get("measurement.apparatus_sigma");
  QrfUnitary u;
  u.kind = UnitaryKind::Sx;
  u.masses = masses_of(cfg);
  const MeasurementModel mt = transform_measurement_model(u, model);
  x.save_text("source: " + format_observable(model.observable, false) + " (frame C)\ntarget: " +
                  format_observable(mt.observable, true) + " (frame A)\n",
              "observables");

  const bool same = std::abs(ga.dx - gb.dx) <= 1e-12 * ga.dx && ga.n == gb.n;
  const int ns = cfg.get_int("state.samples");
  double born = 0.0, inv = 0.0;
  for (int k = 0; k < ns; ++k) {
    std::vector<Axis> axes{Axis::continuous("A", ga, cfg.mass("A")), Axis::continuous("B", gb, cfg.mass("B"))};
    const MultiState psi = in_lab(random_smooth_state(axes, cfg.seed() + static_cast<std::uint64_t>(k)), cfg.mass("C"));
    const MeasurementModel mr = resolved(model, psi);
    const MultiState src = attach_apparatus(psi, mr);
    const OutcomeDistribution d = measure_via_pointer(src, mr);
    if (model.pointer_width == 0.0 && same) {
      const MultiState w = all_position(psi);
      std::map<int, double> pb;
      for (int i = 0; i < ga.n; ++i)
        for (int j = 0; j < gb.n; ++j) pb[j - i] += std::norm(w.amp[static_cast<std::size_t>(i) * gb.n + j]);
      double r = std::abs(d.total() - 1.0);
      for (const auto& [o, p] : pb) r = std::max(r, std::abs(p - d.at(o * ga.dx)));
      born = std::max(born, r);
    }
    inv = std::max(inv, probability_invariance_residual(psi, model, u));
    if (k == 0) {
      x.save_dist(d, mr.pointer_dx, "C_pointer");
      const MultiState dst = apply(with_apparatus(u, mr), src);
      x.save_dist(measure_via_pointer(dst, mt), mr.pointer_dx, "A_pointer");
      x.save(psi, "A");
      x.save(psi, "B");
    }
  }
  if (model.pointer_width == 0.0 && same) {
    x.metric("born_residual", born, "measure_via_pointer vs direct Born marginal of x_B - x_A");
    x.verdict("pointer_equals_born", born <= 1e-8);
  }
  x.metric("invariance_residual", inv, "probability_invariance_residual(S_x) over random states");
  x.metric("states", ns, "config");
  x.verdict("frame_invariant_outcomes", inv <= 1e-6);
}

using Runner = std::function<void(Ctx&)>;

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"fig3", [](Ctx& x) { run_fig3(x, x.cfg.get_string("case")); }},
      {"fig3-a", [](Ctx& x) { run_fig3(x, "a"); }},
      {"fig3-b", [](Ctx& x) { run_fig3(x, "b"); }},
      {"fig3-c", [](Ctx& x) { run_fig3(x, "c"); }},
      {"fig3-d", [](Ctx& x) { run_fig3(x, "d"); }},
      {"translation-symmetry", run_translation_symmetry},
      {"boost-superposition", run_boost_superposition},
      {"relvel", run_relvel},
      {"wep", run_wep},
      {"wep-linear", run_wep_linear},
      {"wep-trotter", run_wep_trotter},
      {"doppler", run_doppler},
      {"measurement-invariance", run_measurement_invariance},
      {"canonicity-naive", run_canonicity_naive},
      {"print-map", run_print_map},
  };
  return r;
}

}  // namespace

std::vector<std::string> scenario_names() {
  std::vector<std::string> out;
  for (const auto& [n, f] : registry()) out.push_back(n);
  return out;
}

ScenarioReport run_scenario(const std::string& name, const ScenarioConfig& cfg, const std::string& out_dir) {
  const Runner* run = nullptr;
  for (const auto& [n, f] : registry())
    if (n == name) run = &f;
  if (!run) throw UnknownScenario("unknown scenario '" + name + "'");
  ScenarioReport rep;
  rep.scenario = name;
  rep.config_echo = cfg.to_text();
  if (!out_dir.empty()) fs::create_directories(out_dir);
  Ctx x{cfg, out_dir, rep, ""};
  (*run)(x);
  if (!out_dir.empty()) {
    rep.files.push_back(name + ".json");
    emit_json(rep, (fs::path(out_dir) / (name + ".json")).string());
  }
  return rep;
}

}  // namespace qrf

#include "qrf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "qrf/operators.hpp"

namespace qrf {

HamiltonianSpec& HamiltonianSpec::add(const QuadObservable& q) {
  quad = quad + q;
  return *this;
}

HamiltonianSpec& HamiltonianSpec::add(FunctionTerm t) {
  terms.push_back(std::move(t));
  return *this;
}

std::vector<std::string> HamiltonianSpec::labels() const {
  std::vector<std::string> out = quad.pruned().labels;
  for (const auto& t : terms)
    for (const auto& l : t.labels)
      if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  return out;
}

QuadObservable kinetic(const std::string& label, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("kinetic term needs a positive mass");
  QuadObservable q({label});
  q.quad(1, 1) = 1.0 / (2.0 * mass);
  return q;
}

HamiltonianSpec free_hamiltonian(const std::vector<std::string>& labels, const Masses& masses,
                                 const std::string& frame) {
  HamiltonianSpec h;
  h.frame = frame;
  for (const auto& l : labels) h.add(kinetic(l, masses.at(l)));
  return h;
}

FunctionTerm potential_term(const std::string& label, const Potential& v, double scale, double arg_scale) {
  FunctionTerm t;
  t.name = std::to_string(scale) + " V(" + std::to_string(arg_scale) + " x_" + label + ")";
  t.labels = {label};
  t.rep = Rep::Position;
  t.f = [v, scale, arg_scale](const double* c) { return scale * v.value(arg_scale * c[0]); };
  return t;
}

FunctionTerm photon_dispersion(const std::string& label, double hbar) {
  FunctionTerm t;
  t.name = "hbar omega_" + label;
  t.labels = {label};
  t.f = [hbar](const double* c) { return hbar * c[0]; };
  return t;
}

FunctionTerm level_energies(const std::string& label, std::vector<double> energies) {
  FunctionTerm t;
  t.name = "H_" + label;
  t.labels = {label};
  t.f = [e = std::move(energies)](const double* c) { return e.at(static_cast<std::size_t>(c[0])); };
  return t;
}

namespace {

// Diagonal values of the terms of one representation, evaluated on the state's grid.
CVec diagonal_values(const MultiState& layout, const std::vector<std::string>& labels, const QuadObservable& q,
                     const std::vector<const FunctionTerm*>& fns) {
  std::vector<int> qidx;
  for (const auto& l : q.labels) qidx.push_back(static_cast<int>(std::find(labels.begin(), labels.end(), l) - labels.begin()));
  std::vector<std::vector<int>> fidx;
  for (const auto* f : fns) {
    std::vector<int> ix;
    for (const auto& l : f->labels) ix.push_back(static_cast<int>(std::find(labels.begin(), labels.end(), l) - labels.begin()));
    fidx.push_back(ix);
  }
  MultiState tmp = layout;
  std::fill(tmp.amp.begin(), tmp.amp.end(), cplx(1.0));
  const int nq = q.size();
  multiply_factor(tmp, labels, [&](const double* c) {
    double v = q.constant;
    for (int a = 0; a < 2 * nq; ++a) {
      const double za = c[qidx[a / 2]];
      v += q.lin(a) * za;
      for (int b = 0; b < 2 * nq; ++b)
        if (q.quad(a, b) != 0.0) v += q.quad(a, b) * za * c[qidx[b / 2]];
    }
    double buf[16];
    for (std::size_t k = 0; k < fns.size(); ++k) {
      for (std::size_t j = 0; j < fidx[k].size(); ++j) buf[j] = c[fidx[k][j]];
      v += fns[k]->f(buf);
    }
    return cplx(v);
  });
  return tmp.amp;
}

}  // namespace

MultiState evolve(const MultiState& s, const HamiltonianSpec& h, double t_total, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("evolve: dt must be positive");
  const std::vector<std::string> labels = h.labels();
  for (const auto& l : labels) s.axis_index(l);
  if (t_total == 0.0 || labels.empty()) return s;

  const QuadObservable q = h.quad.pruned();
  const int n = q.size();
  for (int a = 0; a < 2 * n; ++a)
    for (int b = 0; b < 2 * n; ++b)
      if (q.quad(a, b) != 0.0 && (a % 2) != (b % 2))
        throw std::invalid_argument("evolve: representation-mixing term (x p coupling) cannot be split");
  for (const auto& l : q.labels)
    if (s.axis(l).kind != AxisKind::Continuous)
      throw std::invalid_argument("evolve: polynomial terms need continuous axes ('" + l + "')");
  QuadObservable qx = q, qp = q;
  qx.constant = q.constant;
  qp.constant = 0.0;
  for (int a = 0; a < 2 * n; ++a) {
    if (a % 2 == 0) {
      qp.lin(a) = 0.0;
      qp.quad.row(a).setZero();
      qp.quad.col(a).setZero();
    } else {
      qx.lin(a) = 0.0;
      qx.quad.row(a).setZero();
      qx.quad.col(a).setZero();
    }
  }
  std::vector<const FunctionTerm*> fx, fp;
  for (const auto& t : h.terms) (t.rep == Rep::Momentum ? fp : fx).push_back(&t);

  std::vector<std::string> cont;
  for (const auto& l : labels)
    if (s.axis(l).kind == AxisKind::Continuous) cont.push_back(l);
  double hbar = 1.0;
  if (!cont.empty()) hbar = s.axis(cont.front()).grid.hbar;
  const bool has_p = qp.pruned().size() > 0 || !fp.empty();

  MultiState w = s;
  set_rep(w, cont, Rep::Position);
  const CVec vx = diagonal_values(w, labels, qx, fx);
  CVec tp;
  if (has_p) {
    MultiState m = w;
    for (auto& a : m.axes)
      if (std::find(cont.begin(), cont.end(), a.label) != cont.end()) a.rep = Rep::Momentum;
    tp = diagonal_values(m, labels, qp, fp);
  }

  const long steps = std::max(1L, static_cast<long>(std::ceil(std::abs(t_total) / dt - 1e-9)));
  const double h_step = t_total / static_cast<double>(steps);
  const std::size_t N = w.amp.size();
  CVec half(N), full(N), kin;
  for (std::size_t k = 0; k < N; ++k) {
    half[k] = std::polar(1.0, -vx[k].real() * h_step / (2.0 * hbar));
    full[k] = half[k] * half[k];
  }
  if (has_p) {
    kin.resize(N);
    for (std::size_t k = 0; k < N; ++k) kin[k] = std::polar(1.0, -tp[k].real() * h_step / hbar);
  }
  const bool has_x = qx.pruned().size() > 0 || !fx.empty();
  if (!has_p) {
    for (std::size_t k = 0; k < N; ++k) w.amp[k] *= std::polar(1.0, -vx[k].real() * t_total / hbar);
  } else if (!has_x) {
    // both factors diagonal in momentum: one exact step
    set_rep(w, cont, Rep::Momentum);
    for (std::size_t k = 0; k < N; ++k)
      w.amp[k] *= std::polar(1.0, -(tp[k].real() + vx[k].real()) * t_total / hbar);
  } else {
    // axes without position-diagonal terms stay in momentum throughout
    std::vector<std::string> moving;
    const QuadObservable qxp = qx.pruned();
    for (const auto& l : cont) {
      bool used = std::find(qxp.labels.begin(), qxp.labels.end(), l) != qxp.labels.end();
      for (const auto* f : fx) used = used || std::find(f->labels.begin(), f->labels.end(), l) != f->labels.end();
      if (used) moving.push_back(l);
    }
    for (std::size_t k = 0; k < N; ++k) w.amp[k] *= half[k];
    set_rep(w, cont, Rep::Momentum);
    set_rep(w, moving, Rep::Position);
    for (long st = 0; st < steps; ++st) {
      set_rep(w, moving, Rep::Momentum);
      for (std::size_t k = 0; k < N; ++k) w.amp[k] *= kin[k];
      set_rep(w, moving, Rep::Position);
      const CVec& pv = st + 1 < steps ? full : half;
      for (std::size_t k = 0; k < N; ++k) w.amp[k] *= pv[k];
    }
  }
  restore_reps(w, s);
  return w;
}

HamiltonianForm free_form() {
  return {"free", [](const std::vector<std::string>& roles, const Masses& m) {
            HamiltonianSpec h;
            for (const auto& r : roles) h.add(kinetic(r, m.at(r)));
            return h;
          }};
}

HamiltonianForm relative_velocity_form() {
  return {"relative-velocity", [](const std::vector<std::string>& roles, const Masses& m) {
            if (roles.size() != 2) throw std::invalid_argument("relative-velocity form needs two systems");
            double M = 0.0;
            for (const auto& [l, v] : m) M += v;
            HamiltonianSpec h;
            h.add(kinetic(roles[0], m.at(roles[0])));
            h.add(kinetic(roles[1], m.at(roles[1])));
            const QuadObservable sum = QuadObservable::p(roles[0]) + QuadObservable::p(roles[1]);
            h.add(-(1.0 / (2.0 * M)) * sym_product(sum, sum));
            return h;
          }};
}

namespace {

struct Factor {
  bool exp = true;
  QuadObservable g;     // generator at time t
  QuadObservable gdot;  // dG/dt
  PhaseSpaceMap relabel;
};

std::vector<Factor> catalogue(const QrfUnitary& u) {
  const auto& r = u.roles;
  const double mR = u.masses.at(r.ref);
  const double mO = u.masses.at(r.old_frame);
  std::vector<Factor> f;
  auto exp_factor = [](QuadObservable g, QuadObservable gd) {
    Factor x;
    x.g = std::move(g);
    x.gdot = std::move(gd);
    return x;
  };
  auto map_factor = [](PhaseSpaceMap m) {
    Factor x;
    x.exp = false;
    x.relabel = std::move(m);
    return x;
  };
  const QuadObservable kin_ref = kinetic(r.ref, mR);
  const QuadObservable kin_old = kinetic(r.old_frame, mO);
  QuadObservable sum_p, sum_mx;
  for (const auto& l : r.spectators) {
    sum_p = sum_p + QuadObservable::p(l);
    sum_mx = sum_mx + u.masses.at(l) * QuadObservable::x(l);
  }
  switch (u.kind) {
    case UnitaryKind::ST: {
      const double s = u.t - u.tau;
      f.push_back(exp_factor(s * kin_ref, kin_ref));
      f.push_back(exp_factor(sym_product(QuadObservable::x(r.ref), sum_p), QuadObservable(std::vector<std::string>{r.ref})));
      f.push_back(map_factor(parity_map(r.ref, r.old_frame)));
      f.push_back(exp_factor(-s * kin_old, -1.0 * kin_old));
      break;
    }
    case UnitaryKind::Sb:
    case UnitaryKind::Sv: {
      const double t = u.kind == UnitaryKind::Sb ? u.t : 0.0;
      const QuadObservable v = (1.0 / mR) * QuadObservable::p(r.ref);
      // S_v is time independent: no dS/dt contribution
      const double live = u.kind == UnitaryKind::Sb ? 1.0 : 0.0;
      f.push_back(exp_factor(t * kin_ref, live * kin_ref));
      f.push_back(exp_factor(sym_product(v, t * sum_p - sum_mx), live * sym_product(v, sum_p)));
      f.push_back(map_factor(velocity_parity_map(r.ref, r.old_frame, mR, mO)));
      f.push_back(exp_factor(-t * kin_old, -live * kin_old));
      break;
    }
    default: throw std::invalid_argument("no factor catalogue for " + u.name());
  }
  return f;
}

std::vector<std::string> merged(std::vector<std::string> a, const std::vector<std::string>& b) {
  for (const auto& l : b)
    if (std::find(a.begin(), a.end(), l) == a.end()) a.push_back(l);
  return a;
}

// Gauss-Legendre nodes and weights on [0, 1]
const std::vector<std::pair<double, double>>& gauss_legendre() {
  static const std::vector<std::pair<double, double>> nodes = [] {
    const double x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267, 0.9602898564975363};
    const double w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    std::vector<std::pair<double, double>> v;
    for (int i = 0; i < 4; ++i) {
      v.emplace_back(0.5 * (1.0 - x[i]), 0.5 * w[i]);
      v.emplace_back(0.5 * (1.0 + x[i]), 0.5 * w[i]);
    }
    return v;
  }();
  return nodes;
}

HamiltonianSpec transform_by_catalogue(const QrfUnitary& u, const HamiltonianSpec& h) {
  if (!h.terms.empty()) throw std::invalid_argument("transform_hamiltonian: " + u.name() + " supports polynomial H only");
  std::vector<std::string> labels{u.roles.ref};
  labels.insert(labels.end(), u.roles.spectators.begin(), u.roles.spectators.end());
  labels = merged(labels, h.quad.pruned().labels);
  PhaseSpaceMap total = identity_map(labels);
  std::vector<QuadObservable> pending;
  std::vector<std::string> current = labels;
  for (const Factor& f : catalogue(u)) {
    PhaseSpaceMap m;
    if (f.exp) {
      const QuadObservable g = f.g.over(merged(f.g.labels, f.gdot.labels));
      m = extended(generator_flow(g, 1.0), current);
      if (f.gdot.pruned().size() > 0) {
        QuadObservable term;
        for (const auto& [s, w] : gauss_legendre()) {
          const PhaseSpaceMap fs = extended(generator_flow(g, s), current);
          term = term + (-w) * conjugate_observable(fs, f.gdot);
        }
        for (auto& p : pending) p = conjugate_observable(m, p);
        pending.push_back(term.over(current));
        total = compose(m, total);
        continue;
      }
    } else {
      std::vector<std::string> extra;
      for (const auto& l : current)
        if (l != f.relabel.in_labels.front()) extra.push_back(l);
      m = extended(f.relabel, extra);
    }
    for (auto& p : pending) p = conjugate_observable(m, p);
    total = compose(m, total);
    current = m.out_labels;
  }
  HamiltonianSpec out;
  out.frame = u.roles.ref;
  out.quad = conjugate_observable(total, h.quad);
  for (const auto& p : pending) out.quad = out.quad + p;
  out.quad = out.quad.pruned(1e-14);
  return out;
}

}  // namespace

HamiltonianSpec transform_hamiltonian(const QrfUnitary& u, const HamiltonianSpec& h) {
  const auto& r = u.roles;
  switch (u.kind) {
    case UnitaryKind::ST:
    case UnitaryKind::Sb:
    case UnitaryKind::Sv: return transform_by_catalogue(u, h);
    case UnitaryKind::Sx:
    case UnitaryKind::Sp:
    case UnitaryKind::ParitySwap:
    case UnitaryKind::VelocityParity:
    case UnitaryKind::Identity: {
      if (!h.terms.empty()) throw std::invalid_argument("transform_hamiltonian: polynomial H required");
      HamiltonianSpec out;
      out.frame = u.kind == UnitaryKind::Identity ? h.frame : r.ref;
      out.quad = conjugate_observable(*u.map(), h.quad).pruned(1e-14);
      return out;
    }
    case UnitaryKind::SEP: {
      if (!u.potential) throw std::invalid_argument("S_EP needs a potential");
      const Potential v = *u.potential;
      const double mA = u.masses.at(r.ref), mC = u.masses.at(r.old_frame);
      HamiltonianSpec out;
      out.frame = r.ref;
      for (const auto& l : r.spectators) out.add(kinetic(l, u.masses.at(l)));
      out.add(kinetic(r.old_frame, mC));
      if (v.kind() == Potential::Kind::Zero) return out;
      if (v.kind() == Potential::Kind::Linear) {
        // (m_C/m_A) V(-q_C) - (m_B/m_A) V' q_B with V = k x + V(0)
        const double k = v.region_slope(0);
        out.add(QuadObservable::scalar(mC / mA * v.value(0.0)));
        out.add(-(mC / mA * k) * QuadObservable::x(r.old_frame));
        for (const auto& l : r.spectators) out.add(-(u.masses.at(l) / mA * k) * QuadObservable::x(l));
        return out.quad = out.quad.pruned(1e-14), out;
      }
      out.add(potential_term(r.old_frame, v, mC / mA, -1.0));
      const double arg = u.include_curvature ? mC / mA : 1.0;
      for (const auto& l : r.spectators) {
        const double mB = u.masses.at(l);
        FunctionTerm t;
        t.name = "-(m_" + l + "/m_" + r.ref + ") V'(-q_" + r.old_frame + ") q_" + l;
        t.labels = {r.old_frame, l};
        t.f = [v, mB, mA, arg](const double* c) { return -(mB / mA) * v.derivative(-arg * c[0]) * c[1]; };
        out.add(t);
        if (u.include_curvature) {
          FunctionTerm c2;
          c2.name = "(1/2)(m_" + l + "/m_" + r.ref + ")^2 V''(-(m_C/m_A) q_" + r.old_frame + ") q_" + l + "^2";
          c2.labels = {r.old_frame, l};
          c2.f = [v, mB, mA, arg](const double* c) {
            return 0.5 * (mB / mA) * (mB / mA) * v.second_derivative(-arg * c[0]) * c[1] * c[1];
          };
          out.add(c2);
        }
      }
      return out;
    }
    case UnitaryKind::SD: {
      // rest frame H = pi_C^2/2m_C + hbar omega_B + H_internal  ->  lab frame
      const std::string lab = r.old_frame, atom = r.ref, photon = u.photon;
      const double mA = u.masses.at(atom);
      const double c = u.c;
      HamiltonianSpec out;
      out.frame = lab;
      out.add(kinetic(atom, mA));
      for (const auto& t : h.terms) {
        bool touches = false;
        for (const auto& l : t.labels) touches = touches || l == lab || l == photon;
        if (!touches) out.add(t);
      }
      FunctionTerm d;
      d.name = "hbar omega_" + photon + " / (1 - p_" + atom + "/(c m_" + atom + "))";
      d.labels = {atom, photon};
      d.rep = Rep::Momentum;
      double hbar = 1.0;
      d.f = [mA, c, hbar](const double* z) { return hbar * z[1] / (1.0 - z[0] / (c * mA)); };
      out.add(d);
      return out;
    }
  }
  throw std::logic_error("transform_hamiltonian: unknown family");
}

SymmetryReport is_symmetry(const QrfUnitary& u, const HamiltonianForm& form, const Masses& masses) {
  const auto& r = u.roles;
  std::vector<std::string> src{r.ref}, dst{r.old_frame};
  src.insert(src.end(), r.spectators.begin(), r.spectators.end());
  dst.insert(dst.end(), r.spectators.begin(), r.spectators.end());
  const HamiltonianSpec h = form.build(src, masses);
  const HamiltonianSpec target = form.build(dst, masses);
  const HamiltonianSpec out = transform_hamiltonian(u, h);
  SymmetryReport rep;
  rep.transformed = format_observable(out.quad, true);
  rep.expected = format_observable(target.quad, true);
  if (!out.terms.empty() || !target.terms.empty()) {
    rep.symmetric = false;
    rep.distance = INFINITY;
    return rep;
  }
  rep.distance = coefficient_distance(out.quad, target.quad);
  rep.symmetric = rep.distance <= 1e-12;
  return rep;
}

double commuting_diagram_residual(const UnitaryFamily& s, const HamiltonianSpec& h_source,
                                  const HamiltonianSpec& h_target, const MultiState& psi0, double t, double dt) {
  const MultiState a = s(evolve(psi0, h_source, t, dt), t);
  const MultiState b = evolve(s(psi0, 0.0), h_target, t, dt);
  return distance(a, b);
}

double localization_window(const Potential& v, const Branch& b, double t_max) {
  const int r = v.region(b.x0);
  const auto [lo, hi] = v.region_bounds(r);
  const double g = v.piecewise() ? v.region_slope(r) : v.derivative(b.x0);
  auto margin = [&](double t) {
    const double centre = b.x0 + b.p0 / b.mass * t - 0.5 * g / b.mass * t * t;
    const double spread = b.hbar * t / (2.0 * b.mass * b.sigma);
    const double sig = std::sqrt(b.sigma * b.sigma + spread * spread);
    return std::min(hi - (centre + 5.0 * sig), (centre - 5.0 * sig) - lo);
  };
  if (!(margin(0.0) > 0.0)) throw std::domain_error("localization_window: branch initially straddles a breakpoint");
  const double step = 1e-3;
  double t0 = 0.0;
  for (double t = step; t <= t_max; t += step) {
    if (margin(t) < 0.0) {
      double a = t0, c = t;
      for (int it = 0; it < 60; ++it) {
        const double m = 0.5 * (a + c);
        (margin(m) >= 0.0 ? a : c) = m;
      }
      return a;
    }
    t0 = t;
  }
  return t_max;
}

AccelerationCheck acceleration_superposition_check(const Potential& v, const MultiState& state_a, double mass) {
  if (state_a.axes.size() != 1) throw std::invalid_argument("acceleration check expects a single-axis state");
  MultiState w = state_a;
  const std::string label = w.axes[0].label;
  set_rep(w, {label}, Rep::Position);
  const auto marg = marginal(w, label);
  const Axis& a = w.axes[0];
  const double mx = *std::max_element(marg.begin(), marg.end());
  std::vector<std::pair<int, int>> runs;
  for (int k = 0; k < a.dim();) {
    if (marg[k] <= 1e-12 * mx) {
      ++k;
      continue;
    }
    int e = k;
    while (e + 1 < a.dim() && marg[e + 1] > 1e-12 * mx) ++e;
    runs.emplace_back(k, e);
    k = e + 1;
  }
  AccelerationCheck out;
  for (const auto& [lo, hi] : runs) {
    double wsum = 0.0, c = 0.0;
    for (int k = lo; k <= hi; ++k) {
      wsum += marg[k];
      c += marg[k] * a.coord(k);
    }
    out.centres.push_back(c / wsum);
    out.accelerations.push_back(-v.derivative(c / wsum) / mass);
  }
  for (std::size_t i = 0; i + 1 < out.centres.size(); ++i) {
    const int mid = static_cast<int>(std::lround((0.5 * (out.centres[i] + out.centres[i + 1])) / a.grid.dx)) + a.grid.n / 2;
    if (mid >= 0 && mid < a.dim() && marg[mid] > 1e-12 * mx)
      throw std::domain_error("acceleration check: branches overlap");
  }
  double num = 0.0, den = 0.0;
  for (int k = 0; k < a.dim(); ++k) {
    const double x = a.coord(k);
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.centres.size(); ++i)
      if (std::abs(x - out.centres[i]) < std::abs(x - out.centres[best])) best = i;
    const cplx exact = -v.derivative(x) / mass * w.amp[k];
    const cplx approx = out.accelerations.empty() ? cplx(0.0) : out.accelerations[best] * w.amp[k];
    num += std::norm(exact - approx);
    den += std::norm(w.amp[k]);
  }
  out.residual = std::sqrt(num / den);
  return out;
}

TrotterDisplacement trotter_XA(const Potential& v, double dt, double mass, double x_scale, double p_scale,
                               double tol) {
  if (!(dt > 0.0) || !(mass > 0.0)) throw std::invalid_argument("trotter_XA: dt and mass must be positive");
  TrotterDisplacement d;
  d.dt = dt;
  d.mass = mass;
  double curv = 0.0;
  if (v.kind() == Potential::Kind::General) {
    for (int i = 0; i <= 200; ++i) curv = std::max(curv, std::abs(v.second_derivative(-x_scale + 2.0 * x_scale * i / 200)));
  }
  // third-order term of x(dt): -(1/6m) V'' (p/m) dt^3
  d.error_bound = curv * p_scale / (6.0 * mass * mass) * dt * dt * dt;
  if (d.error_bound > tol)
    throw std::domain_error("trotter_XA: O(dt^3) bound " + std::to_string(d.error_bound) + " exceeds tolerance");
  d.linear_part = QuadObservable(std::vector<std::string>{"A"});
  d.linear_part.lin(1) = dt / mass;
  if (v.kind() == Potential::Kind::Linear) d.linear_part.constant = -0.5 * v.region_slope(0) / mass * dt * dt;
  d.displacement = [v, dt, mass](double x, double p) { return p / mass * dt - 0.5 * v.derivative(x) / mass * dt * dt; };
  return d;
}

}  // namespace qrf

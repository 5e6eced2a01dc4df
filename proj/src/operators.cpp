#include "qrf/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qrf/dynamics.hpp"
#include "qrf/fft.hpp"
#include "qrf/kernels.hpp"
#include "qrf/parallel.hpp"

namespace qrf {

namespace {

constexpr double kGuardWeight = 1e-14;

double hbar_of(const MultiState& s, const std::string& label) { return s.axis(label).grid.hbar; }

void check_roles(const MultiState& s, const FrameRoles& r) {
  if (s.frame != r.old_frame)
    throw std::invalid_argument("state is described in frame '" + s.frame + "', expected '" + r.old_frame + "'");
  if (s.has(r.old_frame)) throw std::invalid_argument("state already carries an axis named '" + r.old_frame + "'");
  if (s.axis(r.ref).kind != AxisKind::Continuous)
    throw std::invalid_argument("reference system '" + r.ref + "' must be continuous");
  for (const auto& l : r.spectators) {
    if (l == r.ref || l == r.old_frame) throw std::invalid_argument("spectator label collides with frame labels");
    if (s.axis(l).kind != AxisKind::Continuous)
      throw std::invalid_argument("spectator '" + l + "' must be continuous");
  }
}

std::vector<std::string> with_ref(const FrameRoles& r) {
  std::vector<std::string> l{r.ref};
  l.insert(l.end(), r.spectators.begin(), r.spectators.end());
  return l;
}

// Rejects controlled shifts larger than half of the target grid for any
// control value that carries weight.
void guard(const MultiState& s, const std::string& control, Rep rep, const std::function<double(double)>& shift,
           double half_range, const char* what) {
  const auto w = marginal_in(s, control, rep);
  Axis a = s.axis(control);
  a.rep = rep;
  for (int k = 0; k < a.dim(); ++k) {
    if (w[k] <= kGuardWeight) continue;
    const double d = std::abs(shift(a.coord(k)));
    if (d > half_range * (1.0 + 1e-12))
      throw std::domain_error(std::string("wraparound guard: controlled ") + what + " of " + std::to_string(d) +
                              " exceeds half the target grid (" + std::to_string(half_range) + ")");
  }
}

double half_length(const MultiState& s, const std::vector<std::string>& labels) {
  double h = INFINITY;
  for (const auto& l : labels) h = std::min(h, 0.5 * s.axis(l).grid.length());
  return h;
}

double half_momentum_range(const MultiState& s, const std::vector<std::string>& labels) {
  double h = INFINITY;
  for (const auto& l : labels) h = std::min(h, 0.5 * s.axis(l).grid.n * s.axis(l).grid.dp());
  return h;
}

void free_phase(MultiState& w, const std::string& label, double mass, double t) {
  if (t == 0.0) return;
  const double hb = hbar_of(w, label);
  set_rep(w, {label}, Rep::Momentum);
  multiply_phase(w, {label}, [=](const double* c) { return -c[0] * c[0] * t / (2.0 * mass * hb); });
}

// e^{(i/hbar) x_R sum p_S}
void controlled_translation(MultiState& w, const FrameRoles& r) {
  const double hb = hbar_of(w, r.ref);
  set_rep(w, {r.ref}, Rep::Position);
  guard(w, r.ref, Rep::Position, [](double x) { return x; }, half_length(w, r.spectators), "translation");
  set_rep(w, r.spectators, Rep::Momentum);
  const std::size_t ns = r.spectators.size();
  multiply_phase(w, with_ref(r), [=](const double* c) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= ns; ++j) sum += c[j];
    return c[0] * sum / hb;
  });
}

// e^{(i/hbar)(p_R/m_R) sum_S (t p_S - m_S x_S)}, factorized as momentum phase x position phase x scalar
void controlled_boost(MultiState& w, const FrameRoles& r, double t) {
  const double hb = hbar_of(w, r.ref);
  const double mR = w.axis(r.ref).mass;
  std::vector<double> ms;
  double msum = 0.0;
  for (const auto& l : r.spectators) {
    ms.push_back(w.axis(l).mass);
    msum += ms.back();
  }
  set_rep(w, {r.ref}, Rep::Momentum);
  guard(w, r.ref, Rep::Momentum, [=](double p) { return p / mR * t; }, half_length(w, r.spectators), "translation");
  double mmax = *std::max_element(ms.begin(), ms.end());
  guard(w, r.ref, Rep::Momentum, [=](double p) { return p / mR * mmax; }, half_momentum_range(w, r.spectators),
        "momentum kick");
  const std::size_t ns = r.spectators.size();
  const auto labels = with_ref(r);
  set_rep(w, r.spectators, Rep::Position);
  multiply_phase(w, labels, [=](const double* c) {
    double sum = 0.0;
    for (std::size_t j = 0; j < ns; ++j) sum += ms[j] * c[j + 1];
    return -(c[0] / mR) * sum / hb;
  });
  if (t == 0.0) return;
  set_rep(w, r.spectators, Rep::Momentum);
  multiply_phase(w, labels, [=](const double* c) {
    const double v = c[0] / mR;
    double sum = 0.0;
    for (std::size_t j = 1; j <= ns; ++j) sum += c[j];
    return (v * t * sum + 0.5 * v * v * t * msum) / hb;
  });
}

// Swaps the reference axis into the old-frame axis and updates the frame tag.
MultiState finish(MultiState w, const MultiState& original, const FrameRoles& r, bool velocity) {
  const double m_ref = w.axis(r.ref).mass;
  const double m_old = original.frame_mass;
  const Rep ref_rep = original.axis(r.ref).rep;
  w = velocity ? apply_velocity_parity(w, r.ref, r.old_frame, m_ref, m_old)
               : apply_parity_swap(w, r.ref, r.old_frame, m_old);
  w.frame = r.ref;
  w.frame_mass = m_ref;
  restore_reps(w, original);
  set_rep(w, {r.old_frame}, ref_rep);
  return w;
}

}  // namespace

std::string QrfUnitary::name() const {
  switch (kind) {
    case UnitaryKind::Sx: return "Sx";
    case UnitaryKind::Sp: return "Sp";
    case UnitaryKind::ST: return "ST";
    case UnitaryKind::Sb: return "Sb";
    case UnitaryKind::Sv: return "Sv";
    case UnitaryKind::SEP: return "SEP";
    case UnitaryKind::SD: return "SD";
    case UnitaryKind::ParitySwap: return "parity_swap";
    case UnitaryKind::VelocityParity: return "velocity_parity";
    case UnitaryKind::Identity: return "identity";
  }
  return "?";
}

std::optional<PhaseSpaceMap> QrfUnitary::map() const {
  const auto& r = roles;
  switch (kind) {
    case UnitaryKind::Sx: return map_Sx(r.ref, r.spectators, r.old_frame);
    case UnitaryKind::Sp: return map_Sp(r.ref, r.spectators, r.old_frame);
    case UnitaryKind::ST: return map_ST(t, tau, masses, r.ref, r.spectators, r.old_frame);
    case UnitaryKind::Sb: return map_Sb(t, masses, r.ref, r.spectators, r.old_frame);
    case UnitaryKind::Sv: return map_Sv(masses, r.ref, r.spectators, r.old_frame);
    case UnitaryKind::ParitySwap: return extended(parity_map(r.ref, r.old_frame), r.spectators);
    case UnitaryKind::VelocityParity:
      return extended(velocity_parity_map(r.ref, r.old_frame, masses.at(r.ref), masses.at(r.old_frame)),
                      r.spectators);
    case UnitaryKind::Identity: return identity_map(with_ref(r));
    default: return std::nullopt;
  }
}

MultiState apply_parity_swap(const MultiState& s, const std::string& from, const std::string& to, double new_mass) {
  const Axis& a = s.axis(from);
  if (a.kind != AxisKind::Continuous) throw std::invalid_argument("parity swap needs a continuous axis");
  MultiState w = parity_axis(s, from);
  return relabel(w, from, to, new_mass > 0.0 ? new_mass : a.mass);
}

MultiState apply_velocity_parity(const MultiState& s, const std::string& from, const std::string& to, double m_from,
                                 double m_to) {
  if (!(m_from > 0.0) || !(m_to > 0.0)) throw std::invalid_argument("velocity parity needs positive masses");
  if (s.axis(from).kind != AxisKind::Continuous) throw std::invalid_argument("velocity parity needs a continuous axis");
  MultiState w = parity_axis(s, from);
  w = rescale_axis(w, from, m_from / m_to);
  return relabel(w, from, to, m_to);
}

MultiState apply_Sx(const MultiState& s, const FrameRoles& r) {
  check_roles(s, r);
  MultiState w = s;
  controlled_translation(w, r);
  return finish(std::move(w), s, r, false);
}

MultiState apply_Sp(const MultiState& s, const FrameRoles& r) {
  check_roles(s, r);
  MultiState w = s;
  const double hb = hbar_of(w, r.ref);
  set_rep(w, {r.ref}, Rep::Momentum);
  guard(w, r.ref, Rep::Momentum, [](double p) { return p; }, half_momentum_range(w, r.spectators), "momentum kick");
  set_rep(w, r.spectators, Rep::Position);
  const std::size_t ns = r.spectators.size();
  multiply_phase(w, with_ref(r), [=](const double* c) {
    double sum = 0.0;
    for (std::size_t j = 1; j <= ns; ++j) sum += c[j];
    return -c[0] * sum / hb;
  });
  return finish(std::move(w), s, r, false);
}

MultiState apply_ST(const MultiState& s, double t, double tau, const FrameRoles& r) {
  check_roles(s, r);
  const double dt = t - tau;
  MultiState w = s;
  free_phase(w, r.ref, w.axis(r.ref).mass, -dt);
  controlled_translation(w, r);
  w = finish(std::move(w), s, r, false);
  const Rep rep = w.axis(r.old_frame).rep;
  free_phase(w, r.old_frame, w.axis(r.old_frame).mass, dt);
  set_rep(w, {r.old_frame}, rep);
  return w;
}

MultiState apply_Sb(const MultiState& s, double t, const FrameRoles& r) {
  check_roles(s, r);
  MultiState w = s;
  free_phase(w, r.ref, w.axis(r.ref).mass, -t);
  controlled_boost(w, r, t);
  w = finish(std::move(w), s, r, true);
  const Rep rep = w.axis(r.old_frame).rep;
  free_phase(w, r.old_frame, w.axis(r.old_frame).mass, t);
  set_rep(w, {r.old_frame}, rep);
  return w;
}

MultiState apply_Sv(const MultiState& s, const FrameRoles& r) { return apply_Sb(s, 0.0, r); }

namespace {

struct BranchSplit {
  std::vector<int> part;          // grid index -> part id
  std::vector<double> slope;      // per part
  std::vector<double> weight;     // per part
  std::vector<double> centre;     // per part
};

// Contiguous runs of the position marginal above a relative threshold.
std::vector<std::pair<int, int>> support_runs(const std::vector<double>& w) {
  const double mx = *std::max_element(w.begin(), w.end());
  const double thr = 1e-12 * mx;
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(w.size());
  for (int k = 0; k < n;) {
    if (w[k] <= thr) {
      ++k;
      continue;
    }
    int e = k;
    while (e + 1 < n && w[e + 1] > thr) ++e;
    runs.emplace_back(k, e);
    k = e + 1;
  }
  return runs;
}

BranchSplit split_branches(const MultiState& w, const std::string& label, const Potential& v, double tol) {
  const auto marg = marginal(w, label);
  const Axis& a = w.axis(label);
  const int n = a.dim();
  BranchSplit b;
  b.part.assign(n, 0);
  if (v.piecewise()) {
    const int nr = v.region_count();
    b.slope.resize(nr);
    b.weight.assign(nr, 0.0);
    b.centre.assign(nr, 0.0);
    for (int r = 0; r < nr; ++r) b.slope[r] = v.region_slope(r);
    for (int k = 0; k < n; ++k) {
      const int r = v.region(a.coord(k));
      b.part[k] = r;
      b.weight[r] += marg[k];
      b.centre[r] += marg[k] * a.coord(k);
    }
    for (int r = 0; r < nr; ++r)
      if (b.weight[r] > 0) b.centre[r] /= b.weight[r];
    for (const auto& [lo, hi] : support_runs(marg)) {
      std::vector<double> per(nr, 0.0);
      double total = 0.0;
      for (int k = lo; k <= hi; ++k) {
        per[b.part[k]] += marg[k];
        total += marg[k];
      }
      const double main = *std::max_element(per.begin(), per.end());
      if (total - main > tol)
        throw std::domain_error("branch de-localization: " + std::to_string(total - main) +
                                " of the amplitude mass lies outside a single-slope region");
    }
    return b;
  }
  const auto runs = support_runs(marg);
  const int nr = static_cast<int>(runs.size());
  b.weight.assign(nr, 0.0);
  b.centre.assign(nr, 0.0);
  for (int r = 0; r < nr; ++r) {
    for (int k = runs[r].first; k <= runs[r].second; ++k) {
      b.weight[r] += marg[k];
      b.centre[r] += marg[k] * a.coord(k);
    }
    b.centre[r] /= b.weight[r];
  }
  for (int k = 0; k < n; ++k) {
    int best = 0;
    double bd = INFINITY;
    for (int r = 0; r < nr; ++r) {
      const double d = std::abs(a.coord(k) - b.centre[r]);
      if (d < bd) {
        bd = d;
        best = r;
      }
    }
    b.part[k] = best;
  }
  for (int r = 0; r < nr; ++r) b.slope.push_back(v.derivative(b.centre[r]));
  return b;
}

}  // namespace

MultiState apply_SEP(const MultiState& s, double t, const Potential& v, const FrameRoles& r, const SEPOptions& opt,
                     SEPReport* report) {
  check_roles(s, r);
  const double mA = s.axis(r.ref).mass;
  const double mC = s.frame_mass;
  const double hb = hbar_of(s, r.ref);

  // back to the Heisenberg picture of A
  HamiltonianSpec ha;
  ha.frame = r.old_frame;
  ha.add(kinetic(r.ref, mA));
  if (v.kind() != Potential::Kind::Zero) ha.add(potential_term(r.ref, v));
  MultiState w = evolve(s, ha, -t, opt.dt);
  set_rep(w, {r.ref}, Rep::Position);

  const BranchSplit split = split_branches(w, r.ref, v, opt.localization_tol);
  const int ax = w.axis_index(r.ref);
  const auto strides = w.strides();
  const int nA = w.axes[ax].dim();
  std::vector<double> ms;
  for (const auto& l : r.spectators) ms.push_back(w.axis(l).mass);
  const std::size_t ns = ms.size();
  const auto labels = with_ref(r);

  MultiState acc = w;
  std::fill(acc.amp.begin(), acc.amp.end(), cplx(0.0));
  set_rep(acc, r.spectators, Rep::Position);
  double ordering = 0.0;
  for (std::size_t part = 0; part < split.slope.size(); ++part) {
    if (split.weight[part] <= 0.0) continue;
    const double g = split.slope[part];
    MultiState br = w;
    for (std::size_t f = 0; f < br.amp.size(); ++f) {
      const int k = static_cast<int>((f / strides[ax]) % nA);
      if (split.part[k] != static_cast<int>(part)) br.amp[f] = 0.0;
    }
    if (!v.piecewise()) {
      // size of the neglected (V'(x) - g) term on this branch
      const auto mb = marginal(br, r.ref);
      double e = 0.0;
      for (int k = 0; k < nA; ++k) e += mb[k] * std::pow(v.derivative(br.axes[ax].coord(k)) - g, 2);
      ordering = std::max(ordering, std::sqrt(e / std::max(split.weight[part], 1e-300)) * t / hb);
    }
    set_rep(br, {r.ref}, Rep::Momentum);
    set_rep(br, r.spectators, Rep::Momentum);
    multiply_phase(br, labels, [=](const double* c) {
      const double p = c[0];
      double sum_p = 0.0, scalar = 0.0;
      for (std::size_t j = 0; j < ns; ++j) {
        sum_p += c[j + 1];
        scalar += ms[j] / (2.0 * mA * mA) * (p * p * t - p * g * t * t + g * g * t * t * t / 3.0);
      }
      return ((p - 0.5 * g * t) * t / mA * sum_p - scalar) / hb;
    });
    set_rep(br, r.spectators, Rep::Position);
    multiply_phase(br, labels, [=](const double* c) {
      double sum_x = 0.0;
      for (std::size_t j = 0; j < ns; ++j) sum_x += ms[j] * c[j + 1];
      return -(c[0] - g * t) / mA * sum_x / hb;
    });
    set_rep(br, {r.ref}, Rep::Position);
    for (std::size_t f = 0; f < acc.amp.size(); ++f) acc.amp[f] += br.amp[f];
  }
  if (report) {
    report->branch_slopes = split.slope;
    report->branch_weights = split.weight;
    report->ordering_residual = ordering;
  }

  w = finish(std::move(acc), s, r, true);
  HamiltonianSpec hc;
  hc.frame = r.ref;
  hc.add(kinetic(r.old_frame, mC));
  if (v.kind() != Potential::Kind::Zero) hc.add(potential_term(r.old_frame, v, mC / mA, -1.0));
  const Rep rep = w.axis(r.old_frame).rep;
  w = evolve(w, hc, t, opt.dt);
  restore_reps(w, s);
  set_rep(w, {r.old_frame}, rep);
  return w;
}

MultiState apply_photon_dilation(const MultiState& s, const std::string& photon, const std::string& control, double c,
                                 double m_control, bool inverse, const SDOptions& opt) {
  const Axis& pa = s.axis(photon);
  if (pa.kind != AxisKind::Photon) throw std::invalid_argument("dilation target '" + photon + "' is not a photon axis");
  if (!(c > 0.0) || !(m_control > 0.0)) throw std::invalid_argument("dilation needs positive c and mass");
  MultiState w = s;
  set_rep(w, {control}, Rep::Momentum);
  const int cax = w.axis_index(control);
  const int pax = w.axis_index(photon);
  const Axis& ca = w.axes[cax];
  const int nc = ca.dim();
  const int np = pa.dim();
  std::vector<std::vector<double>> pos(nc, std::vector<double>(np));
  std::vector<double> scale(nc);
  for (int k = 0; k < nc; ++k) {
    double f = 1.0 + ca.coord(k) / (c * m_control);
    if (!(f > 0.0)) throw std::domain_error("dilation factor must be positive (|pi/(c m)| too large)");
    if (inverse) f = 1.0 / f;
    scale[k] = 1.0 / std::sqrt(f);
    for (int j = 0; j < np; ++j) pos[k][j] = (pa.omega(j) / f - pa.omega0) / pa.domega;
  }
  const auto dims = w.dims();
  const auto strides = w.strides();
  const FiberLayout fl = fiber_layout(dims, pax);
  const double before = w.norm();
  MultiState out = w;
  parallel_for(fl.count, [&](std::size_t fi) {
    const std::size_t b = fl.base(fi);
    const int k = static_cast<int>((b / strides[cax]) % nc);
    CVec buf(np);
    for (int j = 0; j < np; ++j) buf[j] = w.amp[b + j * fl.stride];
    const CVec res = bandlimited_resample(buf, pos[k]);
    for (int j = 0; j < np; ++j) out.amp[b + j * fl.stride] = scale[k] * res[j];
  });
  const double after = out.norm();
  if (std::abs(after * after - before * before) > opt.unitarity_tol)
    throw std::domain_error("photon dilation lost " + std::to_string(std::abs(after * after - before * before)) +
                            " of the norm (interpolation unitarity)");
  restore_reps(out, s);
  return out;
}

MultiState apply_SD(const MultiState& s, double t, double c, const std::string& lab, const std::string& atom,
                    const std::string& photon, const SDOptions& opt) {
  if (s.frame != atom) throw std::invalid_argument("S_D expects a state in the frame of '" + atom + "'");
  if (s.has(atom)) throw std::invalid_argument("state already carries an axis named '" + atom + "'");
  const double mC = s.axis(lab).mass;
  const double mA = s.frame_mass;
  const Rep lab_rep = s.axis(lab).rep;
  MultiState w = s;
  free_phase(w, lab, mC, -t);
  w = apply_photon_dilation(w, photon, lab, c, mC, false, opt);
  w = apply_velocity_parity(w, lab, atom, mC, mA);
  free_phase(w, atom, mA, t);
  set_rep(w, {atom}, lab_rep);
  w.frame = lab;
  w.frame_mass = mC;
  return w;
}

MultiState apply_SD_inverse(const MultiState& s, double t, double c, const std::string& lab, const std::string& atom,
                            const std::string& photon, const SDOptions& opt) {
  if (s.frame != lab) throw std::invalid_argument("inverse S_D expects a state in the frame of '" + lab + "'");
  if (s.has(lab)) throw std::invalid_argument("state already carries an axis named '" + lab + "'");
  const double mA = s.axis(atom).mass;
  const double mC = s.frame_mass;
  const Rep atom_rep = s.axis(atom).rep;
  MultiState w = s;
  free_phase(w, atom, mA, -t);
  w = apply_velocity_parity(w, atom, lab, mA, mC);
  w = apply_photon_dilation(w, photon, lab, c, mC, true, opt);
  free_phase(w, lab, mC, t);
  set_rep(w, {lab}, atom_rep);
  w.frame = atom;
  w.frame_mass = mA;
  return w;
}

MultiState apply(const QrfUnitary& u, const MultiState& s) {
  switch (u.kind) {
    case UnitaryKind::Sx: return apply_Sx(s, u.roles);
    case UnitaryKind::Sp: return apply_Sp(s, u.roles);
    case UnitaryKind::ST: return apply_ST(s, u.t, u.tau, u.roles);
    case UnitaryKind::Sb: return apply_Sb(s, u.t, u.roles);
    case UnitaryKind::Sv: return apply_Sv(s, u.roles);
    case UnitaryKind::SEP: {
      if (!u.potential) throw std::invalid_argument("S_EP needs a potential");
      SEPOptions opt;
      opt.dt = u.dt;
      return apply_SEP(s, u.t, *u.potential, u.roles, opt);
    }
    case UnitaryKind::SD: return apply_SD(s, u.t, u.c, u.roles.old_frame, u.roles.ref, u.photon);
    case UnitaryKind::ParitySwap: {
      MultiState w = apply_parity_swap(s, u.roles.ref, u.roles.old_frame, s.frame_mass);
      w.frame = u.roles.ref;
      w.frame_mass = s.axis(u.roles.ref).mass;
      return w;
    }
    case UnitaryKind::VelocityParity: {
      MultiState w = apply_velocity_parity(s, u.roles.ref, u.roles.old_frame, s.axis(u.roles.ref).mass, s.frame_mass);
      w.frame = u.roles.ref;
      w.frame_mass = s.axis(u.roles.ref).mass;
      return w;
    }
    case UnitaryKind::Identity: return s;
  }
  throw std::logic_error("unknown unitary kind");
}

MultiState classical_oracle(ClassicalKind kind, const ClassicalParams& p, const MultiState& s,
                            const std::string& label) {
  const Axis& a = s.axis(label);
  if (a.kind != AxisKind::Continuous) throw std::invalid_argument("classical oracle needs a continuous axis");
  const double m = a.mass;
  const double hb = a.grid.hbar;
  MultiState w = s;
  switch (kind) {
    case ClassicalKind::Translation: {
      set_rep(w, {label}, Rep::Momentum);
      multiply_phase(w, {label}, [=](const double* c) { return p.X0 * c[0] / hb; });
      break;
    }
    case ClassicalKind::Boost: {
      set_rep(w, {label}, Rep::Position);
      multiply_phase(w, {label}, [=](const double* c) { return -p.v * m * c[0] / hb; });
      set_rep(w, {label}, Rep::Momentum);
      multiply_phase(w, {label}, [=](const double* c) { return (p.v * p.t * c[0] + 0.5 * p.v * p.v * p.t * m) / hb; });
      break;
    }
    case ClassicalKind::Acceleration: {
      const double X = 0.5 * p.a * p.t * p.t;
      const double Xd = p.a * p.t;
      const double integral = p.a * p.a * p.t * p.t * p.t / 3.0;
      set_rep(w, {label}, Rep::Momentum);
      multiply_phase(w, {label}, [=](const double* c) { return (X * c[0] - 0.5 * m * integral) / hb; });
      set_rep(w, {label}, Rep::Position);
      multiply_phase(w, {label}, [=](const double* c) { return -m * Xd * c[0] / hb; });
      break;
    }
  }
  set_rep(w, {label}, a.rep);
  return w;
}

}  // namespace qrf

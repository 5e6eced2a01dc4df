#include "qrf/measurement.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <stdexcept>

#include "qrf/kernels.hpp"

namespace qrf {

double OutcomeDistribution::total() const {
  double s = 0.0;
  for (double p : probability) s += p;
  return s;
}

double OutcomeDistribution::at(double b) const {
  if (outcome.size() < 2) return outcome.empty() ? 0.0 : probability[0];
  const double dx = outcome[1] - outcome[0];
  const long k = std::lround((b - outcome[0]) / dx);
  if (k < 0 || k >= static_cast<long>(outcome.size())) return 0.0;
  return probability[k];
}

MultiState attach_apparatus(const MultiState& s, const MeasurementModel& m) {
  if (m.apparatus.empty() || s.has(m.apparatus)) return s;
  MultiState mstate = coherent_state(m.apparatus_grid, m.apparatus_x0, 0.0, m.apparatus_sigma, m.apparatus,
                                     m.apparatus_mass);
  MultiState out = tensor({s, mstate});
  out.frame = s.frame;
  out.frame_mass = s.frame_mass;
  out.time = s.time;
  return out;
}

namespace {

Rep observable_rep(const QuadObservable& o) {
  const QuadObservable p = o.pruned();
  if (p.size() == 0) return Rep::Position;
  if (p.position_only()) return Rep::Position;
  if (p.momentum_only()) return Rep::Momentum;
  throw std::invalid_argument("measurement: observable mixes positions and momenta (unsupported)");
}

// o(z) at every amplitude of w (axes of the observable already in `rep`).
std::vector<double> observable_values(const MultiState& w, const QuadObservable& o) {
  const QuadObservable q = o.pruned();
  const int n = q.size();
  MultiState tmp = w;
  std::fill(tmp.amp.begin(), tmp.amp.end(), cplx(1.0));
  if (n > 0) {
    multiply_factor(tmp, q.labels, [&](const double* c) {
      double v = q.constant;
      for (int a = 0; a < 2 * n; ++a) {
        v += q.lin(a) * c[a / 2];
        for (int b = 0; b < 2 * n; ++b)
          if (q.quad(a, b) != 0.0) v += q.quad(a, b) * c[a / 2] * c[b / 2];
      }
      return cplx(v);
    });
  } else {
    std::fill(tmp.amp.begin(), tmp.amp.end(), cplx(q.constant));
  }
  std::vector<double> out(tmp.amp.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = tmp.amp[k].real();
  return out;
}

// Pure stand-in over `labels` whose |c|^2 is the joint marginal of w; the readout only
// needs these weights.
MultiState joint_marginal(const MultiState& w, const std::vector<std::string>& labels) {
  if (labels.size() == w.axes.size()) return w;
  std::vector<std::string> order = labels;
  std::vector<Axis> axes;
  for (const auto& l : labels) axes.push_back(w.axis(l));
  for (const auto& a : w.axes)
    if (std::find(labels.begin(), labels.end(), a.label) == labels.end()) order.push_back(a.label);
  const MultiState p = permuted(w, order);
  std::size_t nk = 1;
  for (const auto& a : axes) nk *= static_cast<std::size_t>(a.dim());
  const std::size_t rest = p.amp.size() / nk;
  CVec amp(nk);
  for (std::size_t i = 0; i < nk; ++i) {
    double s = 0.0;
    for (std::size_t r = 0; r < rest; ++r) s += std::norm(p.amp[i * rest + r]);
    amp[i] = std::sqrt(s);
  }
  return from_amplitudes(axes, amp, w.frame, w.frame_mass);
}

}  // namespace

MeasurementModel resolved(const MeasurementModel& m, const MultiState& s) {
  MeasurementModel r = m;
  if (r.pointer_dx > 0.0) return r;
  const QuadObservable q = m.observable.pruned();
  if (q.size() == 0) throw std::invalid_argument("measurement: constant observable needs an explicit pointer_dx");
  const Axis& a = s.axis(q.labels.front());
  if (a.kind != AxisKind::Continuous) {
    r.pointer_dx = a.kind == AxisKind::Photon ? a.domega : 1.0;
  } else {
    r.pointer_dx = observable_rep(q) == Rep::Momentum ? a.grid.dp() : a.grid.dx;
  }
  return r;
}

OutcomeDistribution measure_via_pointer(const MultiState& s, const MeasurementModel& model) {
  const MeasurementModel m = resolved(model, s);
  if (!(m.pointer_width >= 0.0)) throw std::invalid_argument("measurement: non-normalizable pointer");
  MultiState w = attach_apparatus(s, m);
  if (w.has(m.pointer)) throw std::invalid_argument("measurement: pointer label '" + m.pointer + "' already used");
  const Rep rep = observable_rep(m.observable);
  const QuadObservable q = m.observable.pruned();
  set_rep(w, q.labels, rep);
  if (q.size() > 0) w = joint_marginal(w, q.labels);
  const std::vector<double> o = observable_values(w, q);
  double omax = 0.0, pmax = 0.0;
  for (const auto& c : w.amp) pmax = std::max(pmax, std::norm(c));
  for (std::size_t k = 0; k < o.size(); ++k)
    if (std::norm(w.amp[k]) > 1e-24 * pmax) omax = std::max(omax, std::abs(o[k]));
  int n = m.pointer_n;
  if (n <= 0) {
    n = 2 * (static_cast<int>(std::ceil(omax / m.pointer_dx)) + 2 + static_cast<int>(std::ceil(8.0 * m.pointer_width)));
  }
  if (n % 2) ++n;
  if (m.pointer_n <= 0) n = static_cast<int>(std::bit_ceil(static_cast<unsigned>(n)));  // FFT-friendly size
  const Grid1D eg(n, m.pointer_dx, 1.0);
  MultiState xi = m.pointer_width > 0.0 ? coherent_state(eg, 0.0, 0.0, m.pointer_width * m.pointer_dx, m.pointer)
                                        : sharp_state(eg, 0.0, m.pointer);
  xi = to_momentum_rep(xi, m.pointer);
  double hbar = 1.0;
  for (const auto& l : q.labels)
    if (w.axis(l).kind == AxisKind::Continuous) hbar = w.axis(l).grid.hbar;
  // exp(-(i/hbar) O p_E) is diagonal in the system basis, so E's reduced state after the
  // channel is sum_k |c_k|^2 |xi shifted by o_k><...|; points sharing a value share a pointer.
  std::map<long long, std::pair<double, double>> weight;  // key -> (o, sum |c|^2)
  const double key_unit = m.pointer_dx * 1e-9;
  for (std::size_t k = 0; k < o.size(); ++k) {
    const double p = std::norm(w.amp[k]);
    if (p == 0.0) continue;
    auto& e = weight[std::llround(o[k] / key_unit)];
    e.first = o[k];
    e.second += p;
  }
  OutcomeDistribution d;
  d.probability.assign(n, 0.0);
  for (int k = 0; k < n; ++k) d.outcome.push_back(eg.x(k));
  // a shift by a whole number of pointer cells is an exact index roll on the periodic grid
  const MultiState xi_x = from_momentum_rep(xi, m.pointer);
  std::vector<double> xi2(n);
  for (int j = 0; j < n; ++j) xi2[j] = std::norm(xi_x.amp[j]);
  for (const auto& [key, e] : weight) {
    const double cells = e.first / m.pointer_dx;
    const long long r = std::llround(cells);
    if (std::abs(cells - static_cast<double>(r)) <= 1e-9) {
      const int sh = static_cast<int>(((r % n) + n) % n);
      for (int j = 0; j < n; ++j) d.probability[(j + sh) % n] += e.second * xi2[j];
      continue;
    }
    MultiState shifted = xi;
    for (int j = 0; j < n; ++j) shifted.amp[j] *= std::polar(1.0, -e.first * eg.p(j) / hbar);
    const double before = shifted.norm();
    shifted = from_momentum_rep(shifted, m.pointer);
    if (std::abs(shifted.norm() - before) > 1e-10) throw std::runtime_error("measurement: pointer channel not unitary");
    for (int j = 0; j < n; ++j) d.probability[j] += e.second * std::norm(shifted.amp[j]);
  }
  return d;
}

QrfUnitary with_apparatus(const QrfUnitary& u, const MeasurementModel& m) {
  QrfUnitary v = u;
  if (!m.apparatus.empty() &&
      std::find(v.roles.spectators.begin(), v.roles.spectators.end(), m.apparatus) == v.roles.spectators.end()) {
    v.roles.spectators.push_back(m.apparatus);
    v.masses[m.apparatus] = m.apparatus_mass;
  }
  return v;
}

MeasurementModel transform_measurement_model(const QrfUnitary& u, const MeasurementModel& m) {
  if (u.kind == UnitaryKind::Identity) return m;
  if (u.kind == UnitaryKind::SEP || u.kind == UnitaryKind::SD)
    throw std::invalid_argument("transform_measurement_model: unsupported unitary family " + u.name());
  if (m.frame != u.source_frame())
    throw std::invalid_argument("measurement model lives in frame '" + m.frame + "', unitary starts in '" +
                                u.source_frame() + "'");
  const QrfUnitary v = with_apparatus(u, m);
  const PhaseSpaceMap map = *v.map();
  MeasurementModel out = m;
  out.observable = conjugate_observable(map, m.observable.pruned().over(map.in_labels)).pruned(1e-14);
  out.frame = v.target_frame();
  return out;
}

double probability_invariance_residual(const MultiState& s, const MeasurementModel& model, const QrfUnitary& u) {
  const MeasurementModel m = resolved(model, s);
  const MultiState src = attach_apparatus(s, m);
  const OutcomeDistribution a = measure_via_pointer(src, m);
  if (u.kind == UnitaryKind::Identity) return 0.0;
  const MultiState dst = apply(with_apparatus(u, m), src);
  const MeasurementModel mt = transform_measurement_model(u, m);
  const OutcomeDistribution b = measure_via_pointer(dst, mt);
  std::map<long, double> pa, pb;
  for (std::size_t k = 0; k < a.outcome.size(); ++k) pa[std::lround(a.outcome[k] / m.pointer_dx)] += a.probability[k];
  for (std::size_t k = 0; k < b.outcome.size(); ++k) pb[std::lround(b.outcome[k] / m.pointer_dx)] += b.probability[k];
  double r = 0.0;
  for (const auto& [k, v] : pa) r = std::max(r, std::abs(v - (pb.count(k) ? pb[k] : 0.0)));
  for (const auto& [k, v] : pb)
    if (!pa.count(k)) r = std::max(r, v);
  return r;
}

Axis two_level_axis(const std::string& label, double delta_e) {
  return Axis::discrete(label, {"g", "e"}, {0.0, delta_e});
}

MultiState photon_packet(const Axis& axis, double omega, double sigma) {
  if (axis.kind != AxisKind::Photon) throw std::invalid_argument("photon_packet needs a photon axis");
  if (!(sigma > 0.0)) throw std::invalid_argument("photon_packet: width must be positive");
  CVec amp(axis.dim());
  for (int k = 0; k < axis.dim(); ++k) {
    const double u = (axis.omega(k) - omega) / sigma;
    amp[k] = std::exp(-0.25 * u * u);
  }
  MultiState s = from_amplitudes({axis}, amp);
  return normalized(s);
}

namespace {

void check_window(const Axis& ph, double centre, double half) {
  const double lo = ph.omega(0) - 0.5 * ph.domega, hi = ph.omega(ph.dim() - 1) + 0.5 * ph.domega;
  if (centre - half < lo || centre + half > hi)
    throw std::domain_error("absorption window [" + std::to_string(centre - half) + ", " +
                            std::to_string(centre + half) + "] is off the frequency grid");
}

}  // namespace

MultiState apply_absorption_channel(const std::string& frame, const MultiState& s, const AbsorptionModel& m) {
  const Axis& ph = s.axis(m.photon);
  if (ph.kind != AxisKind::Photon) throw std::invalid_argument("absorption: '" + m.photon + "' is not a photon axis");
  const Axis& lv = s.axis(m.levels);
  if (lv.kind != AxisKind::Discrete || lv.dim() != 2) throw std::invalid_argument("absorption: two-level axis expected");
  const double centre = m.delta_e / m.hbar;
  const double half = (m.window > 0.0 ? m.window : ph.domega) * (1.0 + 1e-9);
  const bool lab = frame == m.lab;
  if (!lab && frame != m.atom) throw std::invalid_argument("absorption: unknown frame '" + frame + "'");
  if (s.frame != frame) throw std::invalid_argument("absorption: state is in frame '" + s.frame + "'");
  MultiState w = s;
  double mA = 1.0;
  std::vector<std::string> labels{m.photon};
  if (lab) {
    set_rep(w, {m.atom}, Rep::Momentum);
    mA = w.axis(m.atom).mass;
    labels.push_back(m.atom);
  } else {
    check_window(ph, centre, half);
  }
  const int pax = w.axis_index(m.photon), lax = w.axis_index(m.levels);
  const int aax = lab ? w.axis_index(m.atom) : -1;
  const auto dims = w.dims();
  const auto strides = w.strides();
  const Axis& aa = lab ? w.axes[aax] : w.axes[pax];
  for (std::size_t k = 0; k < w.amp.size(); ++k) {
    const int lvl = static_cast<int>((k / strides[lax]) % dims[lax]);
    if (lvl != 0) continue;
    const int j = static_cast<int>((k / strides[pax]) % dims[pax]);
    double omega_rest = ph.omega(j);
    if (lab) {
      const double p = aa.coord(static_cast<int>((k / strides[aax]) % dims[aax]));
      const double f = 1.0 - p / (m.c * mA);
      if (!(f > 0.0)) throw std::domain_error("absorption: Doppler factor must be positive");
      omega_rest = ph.omega(j) / f;
    }
    if (std::abs(omega_rest - centre) <= half) std::swap(w.amp[k], w.amp[k + strides[lax]]);
  }
  restore_reps(w, s);
  return w;
}

double absorption_probability(const std::string& frame, const MultiState& s, const AbsorptionModel& m) {
  const MultiState w = apply_absorption_channel(frame, s, m);
  return marginal(w, m.levels)[1];
}

double absorption_invariance_residual(const MultiState& rest, const AbsorptionModel& m, double t) {
  const double p_rest = absorption_probability(m.atom, rest, m);
  const MultiState lab = apply_SD(rest, t, m.c, m.lab, m.atom, m.photon);
  return std::abs(p_rest - absorption_probability(m.lab, lab, m));
}

MultiState prepare_resonant_lab_state(const MultiState& atom, const Axis& photon, double omega_b, double sigma_omega,
                                      double c, double t, double lab_mass, const std::string& levels,
                                      double delta_e) {
  if (atom.axes.size() != 1 || atom.axes[0].kind != AxisKind::Continuous)
    throw std::invalid_argument("resonant lab state: atom state must be a single continuous axis");
  if (photon.kind != AxisKind::Photon) throw std::invalid_argument("resonant lab state: photon axis expected");
  const std::string a = atom.axes[0].label;
  MultiState w = with_rep(atom, a, Rep::Momentum);
  const Axis& aa = w.axes[0];
  const double m = aa.mass;
  const double hb = aa.grid.hbar;
  const int na = aa.dim(), np = photon.dim();
  std::vector<Axis> axes{aa, photon, two_level_axis(levels, delta_e)};
  CVec amp(static_cast<std::size_t>(na) * np * 2, 0.0);
  double pmax = 0.0;
  for (const auto& c0 : w.amp) pmax = std::max(pmax, std::norm(c0));
  for (int k = 0; k < na; ++k) {
    const cplx ck = w.amp[k];
    if (std::norm(ck) == 0.0) continue;
    const double p = aa.coord(k);
    const double f = 1.0 - p / (m * c);
    if (!(f > 0.0)) {
      if (std::norm(ck) > 1e-20 * pmax) throw std::domain_error("resonant lab state: Doppler factor not positive");
      continue;
    }
    const cplx phase = std::polar(1.0, -p * p * t / (2.0 * m * hb));
    double norm = 0.0;
    std::vector<double> g(np);
    for (int j = 0; j < np; ++j) {
      const double u = (photon.omega(j) / f - omega_b) / sigma_omega;
      g[j] = std::exp(-0.25 * u * u);
      norm += g[j] * g[j];
    }
    if (norm == 0.0) throw std::domain_error("resonant lab state: photon packet off the frequency grid");
    for (int j = 0; j < np; ++j)
      amp[(static_cast<std::size_t>(k) * np + j) * 2] = ck * phase * g[j] / std::sqrt(norm);
  }
  MultiState out = from_amplitudes(axes, amp, "C", lab_mass);
  out.axes[0].rep = Rep::Momentum;
  set_rep(out, {a}, atom.axes[0].rep);
  return out;
}

}  // namespace qrf

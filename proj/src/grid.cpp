#include "qrf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

#include "qrf/fft.hpp"
#include "qrf/parallel.hpp"

namespace qrf {

Grid1D::Grid1D(int n_, double dx_, double hbar_) : n(n_), dx(dx_), hbar(hbar_) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("Grid1D: n must be even and >= 4");
  if (!(dx > 0.0)) throw std::invalid_argument("Grid1D: dx must be positive");
  if (!(hbar > 0.0)) throw std::invalid_argument("Grid1D: hbar must be positive");
}

double Grid1D::dp() const { return 2.0 * std::numbers::pi * hbar / (n * dx); }

int Grid1D::index_of(double x0) const {
  const double fk = x0 / dx + n / 2;
  const long k = std::lround(fk);
  if (k < 0 || k >= n) throw std::invalid_argument("position outside the grid");
  if (std::abs(x(static_cast<int>(k)) - x0) > 1e-9 * dx)
    throw std::invalid_argument("position is not a grid point");
  return static_cast<int>(k);
}

// ---------------- Axis ----------------

Axis Axis::continuous(std::string label, const Grid1D& g, double mass) {
  if (!(mass > 0.0)) throw std::invalid_argument("continuous subsystem '" + label + "' needs positive mass");
  Axis a;
  a.label = std::move(label);
  a.kind = AxisKind::Continuous;
  a.grid = g;
  a.mass = mass;
  return a;
}

Axis Axis::discrete(std::string label, std::vector<std::string> levels, std::vector<double> energies) {
  if (levels.empty() || levels.size() != energies.size())
    throw std::invalid_argument("discrete subsystem needs matching level names and energies");
  Axis a;
  a.label = std::move(label);
  a.kind = AxisKind::Discrete;
  a.levels = std::move(levels);
  a.energies = std::move(energies);
  return a;
}

Axis Axis::photon(std::string label, int n, double omega0, double domega) {
  if (n < 2) throw std::invalid_argument("photon axis needs at least two modes");
  if (!(omega0 > 0.0) || !(domega > 0.0)) throw std::invalid_argument("photon frequencies must be strictly positive");
  Axis a;
  a.label = std::move(label);
  a.kind = AxisKind::Photon;
  a.n_omega = n;
  a.omega0 = omega0;
  a.domega = domega;
  a.mass = 0.0;
  return a;
}

int Axis::dim() const {
  switch (kind) {
    case AxisKind::Continuous: return grid.n;
    case AxisKind::Photon: return n_omega;
    case AxisKind::Discrete: return static_cast<int>(levels.size());
  }
  return 0;
}

double Axis::coord(int i) const {
  switch (kind) {
    case AxisKind::Continuous: return rep == Rep::Position ? grid.x(i) : grid.p(i);
    case AxisKind::Photon: return omega(i);
    case AxisKind::Discrete: return static_cast<double>(i);
  }
  return 0.0;
}

double Axis::measure() const {
  switch (kind) {
    case AxisKind::Continuous: return rep == Rep::Position ? grid.dx : grid.dp();
    case AxisKind::Photon: return domega;
    case AxisKind::Discrete: return 1.0;
  }
  return 1.0;
}

int Axis::level_index(const std::string& name) const {
  auto it = std::find(levels.begin(), levels.end(), name);
  if (it == levels.end()) throw std::invalid_argument("unknown level '" + name + "' on axis " + label);
  return static_cast<int>(it - levels.begin());
}

bool Axis::same_layout(const Axis& o, double tol) const {
  if (kind != o.kind || dim() != o.dim() || rep != o.rep) return false;
  switch (kind) {
    case AxisKind::Continuous:
      return std::abs(grid.dx - o.grid.dx) <= tol * std::max(1.0, grid.dx) &&
             std::abs(grid.hbar - o.grid.hbar) <= tol;
    case AxisKind::Photon:
      return std::abs(omega0 - o.omega0) <= tol * std::max(1.0, omega0) &&
             std::abs(domega - o.domega) <= tol * std::max(1.0, domega);
    case AxisKind::Discrete: return levels == o.levels;
  }
  return false;
}

// ---------------- MultiState ----------------

std::vector<int> MultiState::dims() const {
  std::vector<int> d;
  d.reserve(axes.size());
  for (const auto& a : axes) d.push_back(a.dim());
  return d;
}

std::vector<std::size_t> MultiState::strides() const {
  std::vector<std::size_t> s(axes.size(), 1);
  for (int i = static_cast<int>(axes.size()) - 2; i >= 0; --i) s[i] = s[i + 1] * axes[i + 1].dim();
  return s;
}

std::size_t MultiState::size() const {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.dim());
  return n;
}

int MultiState::axis_index(const std::string& label) const {
  for (std::size_t i = 0; i < axes.size(); ++i)
    if (axes[i].label == label) return static_cast<int>(i);
  throw std::invalid_argument("unknown subsystem label '" + label + "'");
}

bool MultiState::has(const std::string& label) const {
  return std::any_of(axes.begin(), axes.end(), [&](const Axis& a) { return a.label == label; });
}

const Axis& MultiState::axis(const std::string& label) const { return axes[axis_index(label)]; }
Axis& MultiState::axis(const std::string& label) { return axes[axis_index(label)]; }

std::vector<std::string> MultiState::labels() const {
  std::vector<std::string> out;
  for (const auto& a : axes) out.push_back(a.label);
  return out;
}

double MultiState::norm() const {
  double s = 0.0;
  for (const auto& c : amp) s += std::norm(c);
  return std::sqrt(s);
}

void MultiState::validate() const {
  std::set<std::string> seen;
  for (const auto& a : axes) {
    if (!seen.insert(a.label).second) throw std::invalid_argument("duplicate subsystem label '" + a.label + "'");
    if (a.kind == AxisKind::Continuous && !(a.mass > 0.0))
      throw std::invalid_argument("continuous subsystem '" + a.label + "' needs positive mass");
  }
  if (amp.size() != size()) throw std::invalid_argument("amplitude tensor size does not match subsystem dimensions");
}

double PhotonState::norm() const {
  double s = std::norm(vacuum_amplitude);
  for (const auto& c : mode) s += std::norm(c);
  return std::sqrt(s);
}

void PhotonState::validate(double tol) const {
  if (mode_axis.kind != AxisKind::Photon) throw std::invalid_argument("PhotonState: mode axis must be a photon axis");
  if (static_cast<int>(mode.size()) != mode_axis.dim()) throw std::invalid_argument("PhotonState: mode size mismatch");
  if (std::abs(norm() * norm() - 1.0) > tol) throw std::invalid_argument("PhotonState: not normalized");
}

// ---------------- helpers ----------------

FiberLayout fiber_layout(const std::vector<int>& dims, int ax) {
  FiberLayout f;
  f.n = static_cast<std::size_t>(dims[ax]);
  f.inner = 1;
  for (std::size_t i = ax + 1; i < dims.size(); ++i) f.inner *= static_cast<std::size_t>(dims[i]);
  std::size_t outer = 1;
  for (int i = 0; i < ax; ++i) outer *= static_cast<std::size_t>(dims[i]);
  f.stride = f.inner;
  f.count = outer * f.inner;
  return f;
}

std::vector<int> unravel(std::size_t flat, const std::vector<int>& dims) {
  std::vector<int> idx(dims.size());
  for (int i = static_cast<int>(dims.size()) - 1; i >= 0; --i) {
    idx[i] = static_cast<int>(flat % dims[i]);
    flat /= dims[i];
  }
  return idx;
}

namespace {

double normal_tail(double d, double sigma) { return 0.5 * std::erfc(d / (std::sqrt(2.0) * sigma)); }

void normalize_inplace(CVec& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  if (!(s > 0.0)) throw std::invalid_argument("cannot normalize a zero state");
  const double inv = 1.0 / std::sqrt(s);
  for (auto& c : v) c *= inv;
}

}  // namespace

// ---------------- constructors ----------------

MultiState coherent_state(const Grid1D& g, double x0, double p0, double sigma, const std::string& label, double mass) {
  if (!(sigma > 2.0 * g.dx)) throw std::invalid_argument("coherent_state: sigma must exceed 2 dx");
  const double tail_x = normal_tail(g.x_max() - x0, sigma) + normal_tail(x0 - g.x_min(), sigma);
  const double sp = g.hbar / (2.0 * sigma);
  const double tail_p = normal_tail(g.p(g.n - 1) - p0, sp) + normal_tail(p0 - g.p(0), sp);
  if (tail_x > 1e-12 || tail_p > 1e-12)
    throw std::domain_error("coherent_state: support overflow (tail mass outside the grid exceeds 1e-12)");
  MultiState s;
  s.axes.push_back(Axis::continuous(label, g, mass));
  s.amp.resize(g.n);
  for (int k = 0; k < g.n; ++k) {
    const double x = g.x(k);
    s.amp[k] = std::exp(cplx(-(x - x0) * (x - x0) / (4.0 * sigma * sigma), p0 * x / g.hbar));
  }
  normalize_inplace(s.amp);
  return s;
}

MultiState sharp_state(const Grid1D& g, double x0, const std::string& label, double mass) {
  const int k = g.index_of(x0);
  MultiState s;
  s.axes.push_back(Axis::continuous(label, g, mass));
  s.amp.assign(g.n, 0.0);
  s.amp[k] = 1.0;
  return s;
}

MultiState superpose(const std::vector<MultiState>& parts, const std::vector<cplx>& weights) {
  if (parts.empty() || parts.size() != weights.size()) throw std::invalid_argument("superpose: size mismatch");
  MultiState out = parts.front();
  std::fill(out.amp.begin(), out.amp.end(), cplx(0.0));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const MultiState aligned = permuted(parts[i], out.labels());
    for (std::size_t a = 0; a < out.axes.size(); ++a)
      if (!aligned.axes[a].same_layout(out.axes[a])) throw std::invalid_argument("superpose: axis layouts differ");
    for (std::size_t k = 0; k < out.amp.size(); ++k) out.amp[k] += weights[i] * aligned.amp[k];
  }
  normalize_inplace(out.amp);
  return out;
}

MultiState tensor(const std::vector<MultiState>& parts) {
  if (parts.empty()) throw std::invalid_argument("tensor: no factors");
  MultiState out = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const MultiState& b = parts[i];
    for (const auto& ax : b.axes)
      if (out.has(ax.label)) throw std::invalid_argument("tensor: duplicate label '" + ax.label + "'");
    CVec amp(out.amp.size() * b.amp.size());
    for (std::size_t u = 0; u < out.amp.size(); ++u)
      for (std::size_t v = 0; v < b.amp.size(); ++v) amp[u * b.amp.size() + v] = out.amp[u] * b.amp[v];
    out.axes.insert(out.axes.end(), b.axes.begin(), b.axes.end());
    out.amp = std::move(amp);
  }
  out.validate();
  return out;
}

MultiState from_amplitudes(std::vector<Axis> axes, CVec amp, const std::string& frame, double frame_mass) {
  MultiState s;
  s.axes = std::move(axes);
  s.amp = std::move(amp);
  s.frame = frame;
  s.frame_mass = frame_mass;
  s.validate();
  return s;
}

MultiState random_smooth_state(std::vector<Axis> axes, std::uint64_t seed, int components, double box,
                               double sigma_cells) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MultiState out;
  out.axes = axes;
  out.amp.assign(out.size(), 0.0);
  for (int c = 0; c < components; ++c) {
    std::vector<MultiState> factors;
    for (const auto& ax : axes) {
      MultiState f;
      f.axes = {ax};
      if (ax.kind == AxisKind::Continuous) {
        const Grid1D& g = ax.grid;
        const double sigma = sigma_cells * g.dx * (1.0 + 0.5 * std::abs(uni(rng)));
        const double x0 = box * uni(rng) * 0.5 * g.length();
        const double pmax = 0.5 * g.n * g.dp();
        const double p0 = box * uni(rng) * pmax;
        f = coherent_state(g, x0, p0, sigma, ax.label, ax.mass);
        if (ax.rep == Rep::Momentum) f = to_momentum_rep(f, ax.label);
      } else {
        f.amp.resize(ax.dim());
        for (auto& a : f.amp) a = cplx(gauss(rng), gauss(rng));
        normalize_inplace(f.amp);
      }
      factors.push_back(std::move(f));
    }
    MultiState prod = tensor(factors);
    const cplx w(gauss(rng), gauss(rng));
    for (std::size_t k = 0; k < out.amp.size(); ++k) out.amp[k] += w * prod.amp[k];
  }
  normalize_inplace(out.amp);
  return out;
}

// ---------------- representation changes ----------------

void dft_axis_inplace(MultiState& s, int ax, bool forward) {
  const FiberLayout f = fiber_layout(s.dims(), ax);
  parallel_for(f.count, [&](std::size_t fi) {
    thread_local CVec buf;
    buf.resize(f.n);
    const std::size_t b = f.base(fi);
    for (std::size_t k = 0; k < f.n; ++k) buf[k] = s.amp[b + k * f.stride];
    centered_dft(buf, forward);
    for (std::size_t k = 0; k < f.n; ++k) s.amp[b + k * f.stride] = buf[k];
  });
}

MultiState with_rep(const MultiState& s, const std::string& label, Rep rep) {
  const int ax = s.axis_index(label);
  if (s.axes[ax].kind != AxisKind::Continuous)
    throw std::invalid_argument("representation change needs a continuous subsystem, got '" + label + "'");
  MultiState out = s;
  if (out.axes[ax].rep == rep) return out;
  dft_axis_inplace(out, ax, rep == Rep::Momentum);
  out.axes[ax].rep = rep;
  return out;
}

MultiState to_momentum_rep(const MultiState& s, const std::string& label) { return with_rep(s, label, Rep::Momentum); }

MultiState from_momentum_rep(const MultiState& s, const std::string& label) {
  return with_rep(s, label, Rep::Position);
}

MultiState all_position(const MultiState& s) {
  MultiState out = s;
  for (std::size_t a = 0; a < out.axes.size(); ++a) {
    if (out.axes[a].kind == AxisKind::Continuous && out.axes[a].rep == Rep::Momentum) {
      dft_axis_inplace(out, static_cast<int>(a), false);
      out.axes[a].rep = Rep::Position;
    }
  }
  return out;
}

MultiState parity_axis(const MultiState& s, const std::string& label) {
  const int ax = s.axis_index(label);
  if (s.axes[ax].kind != AxisKind::Continuous)
    throw std::invalid_argument("parity needs a continuous subsystem, got '" + label + "'");
  MultiState out = s;
  const FiberLayout f = fiber_layout(s.dims(), ax);
  const int n = static_cast<int>(f.n);
  for (std::size_t fi = 0; fi < f.count; ++fi) {
    const std::size_t b = f.base(fi);
    for (int k = 1; k < n; ++k) out.amp[b + k * f.stride] = s.amp[b + (n - k) * f.stride];
  }
  return out;
}

MultiState rescale_axis(const MultiState& s, const std::string& label, double factor) {
  if (!(factor > 0.0)) throw std::invalid_argument("rescale_axis: factor must be positive");
  const int ax = s.axis_index(label);
  if (s.axes[ax].kind != AxisKind::Continuous)
    throw std::invalid_argument("rescale_axis needs a continuous subsystem, got '" + label + "'");
  MultiState out = s;
  out.axes[ax].grid.dx *= factor;
  return out;
}

MultiState relabel(const MultiState& s, const std::string& from, const std::string& to, double new_mass) {
  MultiState out = s;
  Axis& a = out.axis(from);
  if (from != to && s.has(to)) throw std::invalid_argument("relabel: label '" + to + "' already present");
  a.label = to;
  if (a.kind == AxisKind::Continuous) {
    if (!(new_mass > 0.0)) throw std::invalid_argument("relabel: mass must be positive");
    a.mass = new_mass;
  }
  return out;
}

MultiState permuted(const MultiState& s, const std::vector<std::string>& order) {
  if (order.size() != s.axes.size()) throw std::invalid_argument("permuted: label count mismatch");
  std::vector<int> src(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) src[i] = s.axis_index(order[i]);
  bool identity = true;
  for (std::size_t i = 0; i < src.size(); ++i) identity = identity && src[i] == static_cast<int>(i);
  if (identity) return s;
  MultiState out = s;
  for (std::size_t i = 0; i < order.size(); ++i) out.axes[i] = s.axes[src[i]];
  const auto old_strides = s.strides();
  const auto new_dims = out.dims();
  const std::size_t na = new_dims.size();
  std::vector<std::size_t> step(na);
  for (std::size_t i = 0; i < na; ++i) step[i] = old_strides[src[i]];
  // odometer over the new index, tracking the matching old offset
  std::vector<int> idx(na, 0);
  std::size_t o = 0;
  for (std::size_t flat = 0; flat < out.amp.size(); ++flat) {
    out.amp[flat] = s.amp[o];
    for (std::size_t i = na; i-- > 0;) {
      o += step[i];
      if (++idx[i] < new_dims[i]) break;
      o -= step[i] * static_cast<std::size_t>(new_dims[i]);
      idx[i] = 0;
    }
  }
  return out;
}

// ---------------- diagnostics ----------------

Eigen::MatrixXcd to_matrix(const MultiState& s, const std::vector<std::string>& rows) {
  std::vector<std::string> order = rows;
  for (const auto& l : s.labels())
    if (std::find(rows.begin(), rows.end(), l) == rows.end()) order.push_back(l);
  const MultiState p = permuted(s, order);
  std::size_t nr = 1;
  for (const auto& l : rows) nr *= static_cast<std::size_t>(s.axis(l).dim());
  const std::size_t nc = p.amp.size() / nr;
  Eigen::MatrixXcd m(nr, nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c = 0; c < nc; ++c) m(r, c) = p.amp[r * nc + c];
  return m;
}

namespace {

void check_bipartition(const MultiState& s, const std::vector<std::string>& side) {
  if (side.empty() || side.size() >= s.axes.size())
    throw std::invalid_argument("bipartition must be a nonempty proper subset of the subsystems");
  std::set<std::string> seen;
  for (const auto& l : side) {
    s.axis_index(l);
    if (!seen.insert(l).second) throw std::invalid_argument("bipartition repeats a label");
  }
}

}  // namespace

Eigen::MatrixXcd reduced_density(const MultiState& s, const std::vector<std::string>& keep) {
  check_bipartition(s, keep);
  const Eigen::MatrixXcd m = to_matrix(s, keep);
  return m * m.adjoint();
}

double purity(const Eigen::MatrixXcd& rho) { return (rho * rho).trace().real(); }

double schmidt_entropy(const MultiState& s, const std::vector<std::string>& side) {
  check_bipartition(s, side);
  const Eigen::MatrixXcd m = to_matrix(s, side);
  const Eigen::MatrixXcd gram = m.rows() <= m.cols() ? Eigen::MatrixXcd(m * m.adjoint())
                                                     : Eigen::MatrixXcd(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
  double sum = es.eigenvalues().sum();
  double h = 0.0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i) / sum;
    if (lam > 1e-300) h -= lam * std::log(lam);
  }
  return std::max(0.0, h);
}

std::vector<double> marginal(const MultiState& s, const std::string& label) {
  const int ax = s.axis_index(label);
  const auto dims = s.dims();
  const FiberLayout f = fiber_layout(dims, ax);
  std::vector<double> out(f.n, 0.0);
  for (std::size_t fi = 0; fi < f.count; ++fi) {
    const std::size_t b = f.base(fi);
    for (std::size_t k = 0; k < f.n; ++k) out[k] += std::norm(s.amp[b + k * f.stride]);
  }
  return out;
}

cplx inner(const MultiState& a, const MultiState& b) {
  const MultiState bb = permuted(b, a.labels());
  for (std::size_t i = 0; i < a.axes.size(); ++i)
    if (!a.axes[i].same_layout(bb.axes[i], 1e-9)) throw std::invalid_argument("inner: axis layouts differ");
  cplx s = 0.0;
  for (std::size_t k = 0; k < a.amp.size(); ++k) s += std::conj(a.amp[k]) * bb.amp[k];
  return s;
}

double fidelity(const MultiState& a, const MultiState& b) { return std::norm(inner(a, b)); }

double distance(const MultiState& a, const MultiState& b) {
  const MultiState bb = permuted(b, a.labels());
  for (std::size_t i = 0; i < a.axes.size(); ++i)
    if (!a.axes[i].same_layout(bb.axes[i], 1e-9)) throw std::invalid_argument("distance: axis layouts differ");
  double s = 0.0;
  for (std::size_t k = 0; k < a.amp.size(); ++k) s += std::norm(a.amp[k] - bb.amp[k]);
  return std::sqrt(s);
}

MultiState normalized(const MultiState& s) {
  MultiState out = s;
  normalize_inplace(out.amp);
  return out;
}

MultiState apply_quadrature(const MultiState& s, const std::string& label, bool momentum) {
  const int ax = s.axis_index(label);
  const Axis& a = s.axes[ax];
  if (a.kind != AxisKind::Continuous) {
    if (momentum) throw std::invalid_argument("momentum quadrature needs a continuous subsystem");
  }
  const Rep original = a.rep;
  MultiState w = s;
  if (a.kind == AxisKind::Continuous) w = with_rep(s, label, momentum ? Rep::Momentum : Rep::Position);
  const FiberLayout f = fiber_layout(w.dims(), ax);
  const Axis& wa = w.axes[ax];
  for (std::size_t fi = 0; fi < f.count; ++fi) {
    const std::size_t b = f.base(fi);
    for (std::size_t k = 0; k < f.n; ++k) w.amp[b + k * f.stride] *= wa.coord(static_cast<int>(k));
  }
  if (a.kind == AxisKind::Continuous) w = with_rep(w, label, original);
  return w;
}

double expectation(const MultiState& s, const QuadObservable& obs) {
  const QuadObservable o = obs.pruned();
  for (const auto& l : o.labels) s.axis_index(l);
  const int n = 2 * o.size();
  std::vector<MultiState> z(n);
  std::vector<bool> needed(n, false);
  for (int a = 0; a < n; ++a) {
    needed[a] = o.lin(a) != 0.0 || (o.quad.row(a).cwiseAbs().maxCoeff() > 0.0);
    if (needed[a]) z[a] = apply_quadrature(s, o.labels[a / 2], a % 2 == 1);
  }
  auto dot = [](const CVec& u, const CVec& v) {
    cplx acc = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) acc += std::conj(u[k]) * v[k];
    return acc;
  };
  double val = o.constant * s.norm() * s.norm();
  for (int a = 0; a < n; ++a)
    if (o.lin(a) != 0.0) val += o.lin(a) * dot(s.amp, z[a].amp).real();
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      if (o.quad(a, b) != 0.0) val += o.quad(a, b) * dot(z[a].amp, z[b].amp).real();
  return val;
}

double mean_x(const MultiState& s, const std::string& label) { return expectation(s, QuadObservable::x(label)); }
double mean_p(const MultiState& s, const std::string& label) { return expectation(s, QuadObservable::p(label)); }

double variance_x(const MultiState& s, const std::string& label) {
  const double m = mean_x(s, label);
  return expectation(s, sym_product(QuadObservable::x(label), QuadObservable::x(label))) - m * m;
}

double variance_p(const MultiState& s, const std::string& label) {
  const double m = mean_p(s, label);
  return expectation(s, sym_product(QuadObservable::p(label), QuadObservable::p(label))) - m * m;
}

}  // namespace qrf

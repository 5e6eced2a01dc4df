#include "qrf/dense.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qrf/fft.hpp"

namespace qrf::dense {

namespace {

void check_layout(const MultiState& s) {
  if (s.size() > kMaxDim)
    throw std::invalid_argument("dense oracle: dimension " + std::to_string(s.size()) + " exceeds " +
                                std::to_string(kMaxDim));
  for (const auto& a : s.axes)
    if (a.kind == AxisKind::Continuous && a.rep != Rep::Position)
      throw std::invalid_argument("dense oracle: layout axes must be in the position representation");
}

Eigen::MatrixXcd kron_all(const std::vector<Eigen::MatrixXcd>& ops) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  for (const auto& o : ops) {
    Eigen::MatrixXcd next = Eigen::kroneckerProduct(out, o).eval();
    out = std::move(next);
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd dft_1d(int n) {
  Eigen::MatrixXcd f(n, n);
  for (int k = 0; k < n; ++k) {
    CVec e(n, 0.0);
    e[k] = 1.0;
    centered_dft(e, true);
    for (int j = 0; j < n; ++j) f(j, k) = e[j];
  }
  return f;
}

Eigen::MatrixXcd on_axis(const MultiState& layout, const std::string& label, const Eigen::MatrixXcd& op) {
  check_layout(layout);
  const int ax = layout.axis_index(label);
  std::vector<Eigen::MatrixXcd> ops;
  for (int i = 0; i < static_cast<int>(layout.axes.size()); ++i) {
    const int d = layout.axes[i].dim();
    ops.push_back(i == ax ? op : Eigen::MatrixXcd::Identity(d, d));
  }
  return kron_all(ops);
}

Eigen::MatrixXcd quadrature(const MultiState& layout, const std::string& label, bool momentum) {
  const Axis& a = layout.axis(label);
  const int n = a.dim();
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(n, n);
  if (a.kind != AxisKind::Continuous) {
    if (momentum) throw std::invalid_argument("dense oracle: no momentum on axis '" + label + "'");
    for (int k = 0; k < n; ++k) d(k, k) = a.coord(k);
    return on_axis(layout, label, d);
  }
  for (int k = 0; k < n; ++k) d(k, k) = momentum ? a.grid.p(k) : a.grid.x(k);
  if (momentum) {
    const Eigen::MatrixXcd f = dft_1d(n);
    d = f.adjoint() * d * f;
  }
  return on_axis(layout, label, d);
}

Eigen::MatrixXcd function_operator(const MultiState& layout, const std::vector<std::string>& labels,
                                   const std::vector<Rep>& reps, const std::function<double(const double*)>& f) {
  check_layout(layout);
  if (labels.size() != reps.size()) throw std::invalid_argument("function_operator: labels/reps mismatch");
  std::vector<Eigen::MatrixXcd> ft;
  std::vector<Axis> axes = layout.axes;
  for (auto& a : axes) {
    bool mom = false;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == a.label && reps[i] == Rep::Momentum && a.kind == AxisKind::Continuous) mom = true;
    const int d = a.dim();
    ft.push_back(mom ? dft_1d(d) : Eigen::MatrixXcd::Identity(d, d));
    if (mom) a.rep = Rep::Momentum;
  }
  std::vector<int> idx;
  for (const auto& l : labels) idx.push_back(layout.axis_index(l));
  const auto dims = layout.dims();
  const std::size_t N = layout.size();
  Eigen::VectorXcd diag(N);
  std::vector<double> c(labels.size());
  for (std::size_t flat = 0; flat < N; ++flat) {
    const auto u = unravel(flat, dims);
    for (std::size_t i = 0; i < idx.size(); ++i) c[i] = axes[idx[i]].coord(u[idx[i]]);
    diag(flat) = f(c.data());
  }
  const Eigen::MatrixXcd F = kron_all(ft);
  return F.adjoint() * diag.asDiagonal() * F;
}

CVec to_vector(const MultiState& s) { return s.amp; }

Eigen::VectorXcd as_eigen(const MultiState& s) {
  Eigen::VectorXcd v(s.amp.size());
  for (std::size_t k = 0; k < s.amp.size(); ++k) v(k) = s.amp[k];
  return v;
}

MultiState from_vector(const MultiState& layout, const Eigen::VectorXcd& v) {
  MultiState s = layout;
  if (static_cast<std::size_t>(v.size()) != s.amp.size()) throw std::invalid_argument("from_vector: size mismatch");
  for (std::size_t k = 0; k < s.amp.size(); ++k) s.amp[k] = v(k);
  return s;
}

Eigen::MatrixXcd matrix_of(const MultiState& layout, const std::function<MultiState(const MultiState&)>& f) {
  check_layout(layout);
  const std::size_t N = layout.size();
  Eigen::MatrixXcd m(N, N);
  MultiState e = layout;
  for (std::size_t k = 0; k < N; ++k) {
    std::fill(e.amp.begin(), e.amp.end(), cplx(0.0));
    e.amp[k] = 1.0;
    MultiState out = all_position(f(e));
    if (out.amp.size() != N) throw std::invalid_argument("matrix_of: map changes the dimension");
    m.col(static_cast<Eigen::Index>(k)) = as_eigen(out);
  }
  return m;
}

Eigen::MatrixXcd expi(const Eigen::MatrixXcd& G, double lambda, double hbar) {
  const Eigen::MatrixXcd a = (cplx(0.0, lambda / hbar) * G).eval();
  return a.exp();
}

Eigen::MatrixXcd parity_permutation(const MultiState& layout, const std::string& label) {
  const Axis& a = layout.axis(label);
  const int n = a.dim();
  Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) p(a.grid.parity_index(k), k) = 1.0;
  return on_axis(layout, label, p);
}

Eigen::MatrixXcd dilation_generator(const Axis& photon) {
  if (photon.kind != AxisKind::Photon) throw std::invalid_argument("dilation generator needs a photon axis");
  const int n = photon.dim();
  const Grid1D g(n, photon.domega, 1.0);
  const Eigen::MatrixXcd f = dft_1d(n);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n), w = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    t(k, k) = g.p(k);
    w(k, k) = photon.omega(k);
  }
  t = f.adjoint() * t * f;
  return 0.5 * (w * t + t * w);
}

MultiState layout_after(const QrfUnitary& u, const MultiState& in_layout) {
  const auto& r = u.roles;
  MultiState out = in_layout;
  std::fill(out.amp.begin(), out.amp.end(), cplx(0.0));
  if (u.kind == UnitaryKind::Identity) return out;
  // S_D swaps the lab axis into the atom; the rest swap the reference into the old frame
  const bool sd = u.kind == UnitaryKind::SD;
  const std::string from = sd ? r.old_frame : r.ref, to = sd ? r.ref : r.old_frame;
  Axis& a = out.axis(from);
  const double m_from = a.mass, m_to = in_layout.frame_mass;
  const bool velocity = sd || u.kind == UnitaryKind::Sb || u.kind == UnitaryKind::Sv ||
                        u.kind == UnitaryKind::VelocityParity || u.kind == UnitaryKind::SEP;
  if (velocity) a.grid.dx *= m_from / m_to;
  a.label = to;
  a.mass = m_to;
  out.frame = from;
  out.frame_mass = m_from;
  return out;
}

Eigen::MatrixXcd dense_matrix(const QrfUnitary& u, const MultiState& in_layout) {
  check_layout(in_layout);
  const auto& r = u.roles;
  const std::size_t N = in_layout.size();
  if (u.kind == UnitaryKind::Identity) return Eigen::MatrixXcd::Identity(N, N);
  const MultiState out = layout_after(u, in_layout);
  auto kin = [](const MultiState& l, const std::string& label) {
    const Eigen::MatrixXcd p = quadrature(l, label, true);
    return (p * p / (2.0 * l.axis(label).mass)).eval();
  };
  switch (u.kind) {
    case UnitaryKind::ParitySwap:
    case UnitaryKind::VelocityParity: return parity_permutation(in_layout, r.ref);
    case UnitaryKind::Sx:
    case UnitaryKind::Sp:
    case UnitaryKind::ST: {
      const double hb = in_layout.axis(r.ref).grid.hbar;
      Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(N, N);
      if (u.kind == UnitaryKind::Sp) {
        const Eigen::MatrixXcd pa = quadrature(in_layout, r.ref, true);
        for (const auto& l : r.spectators) g -= pa * quadrature(in_layout, l, false);
      } else {
        const Eigen::MatrixXcd xa = quadrature(in_layout, r.ref, false);
        for (const auto& l : r.spectators) g += xa * quadrature(in_layout, l, true);
      }
      Eigen::MatrixXcd m = parity_permutation(in_layout, r.ref) * expi(g, 1.0, hb);
      if (u.kind == UnitaryKind::ST) {
        const double s = u.t - u.tau;
        m = expi(kin(out, r.old_frame), -s, hb) * m * expi(kin(in_layout, r.ref), s, hb);
      }
      return m;
    }
    case UnitaryKind::Sb:
    case UnitaryKind::Sv: {
      const double t = u.kind == UnitaryKind::Sb ? u.t : 0.0;
      const double hb = in_layout.axis(r.ref).grid.hbar;
      const Eigen::MatrixXcd vel = quadrature(in_layout, r.ref, true) / in_layout.axis(r.ref).mass;
      Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(N, N);
      for (const auto& l : r.spectators)
        g += vel * (t * quadrature(in_layout, l, true) - in_layout.axis(l).mass * quadrature(in_layout, l, false));
      return expi(kin(out, r.old_frame), -t, hb) * parity_permutation(in_layout, r.ref) * expi(g, 1.0, hb) *
             expi(kin(in_layout, r.ref), t, hb);
    }
    case UnitaryKind::SD: {
      // in: frame = atom, axes {lab, photon, ...}; out: lab frame, lab axis renamed to the atom
      const std::string lab = r.old_frame, atom = r.ref;
      const Axis& la = in_layout.axis(lab);
      const Axis& ph = in_layout.axis(u.photon);
      const double hb = la.grid.hbar;
      const double mC = la.mass;
      const int nc = la.dim();
      const int lax = in_layout.axis_index(lab);
      const int pax = in_layout.axis_index(u.photon);
      if (pax != lax + 1) throw std::invalid_argument("dense S_D expects the photon axis right after the lab axis");
      const Eigen::MatrixXcd d = dilation_generator(ph);
      const int np = ph.dim();
      // block-diagonal over lab momentum slices
      Eigen::MatrixXcd blocks = Eigen::MatrixXcd::Zero(nc * np, nc * np);
      for (int k = 0; k < nc; ++k) {
        const double f = 1.0 + la.grid.p(k) / (u.c * mC);
        if (!(f > 0.0)) throw std::domain_error("dense S_D: dilation factor must be positive");
        blocks.block(k * np, k * np, np, np) = expi(d, -std::log(f), 1.0);
      }
      const Eigen::MatrixXcd F = Eigen::kroneckerProduct(dft_1d(nc), Eigen::MatrixXcd::Identity(np, np)).eval();
      const Eigen::MatrixXcd pair = F.adjoint() * blocks * F;
      std::vector<Eigen::MatrixXcd> ops;
      for (int i = 0; i < static_cast<int>(in_layout.axes.size()); ++i) {
        if (i == pax) continue;
        const int dd = in_layout.axes[i].dim();
        ops.push_back(i == lax ? pair : Eigen::MatrixXcd::Identity(dd, dd));
      }
      const Eigen::MatrixXcd R = kron_all(ops);
      return expi(kin(out, atom), -u.t, hb) * parity_permutation(in_layout, lab) * R * expi(kin(in_layout, lab), u.t, hb);
    }
    default: throw std::invalid_argument("dense oracle: no explicit matrix for " + u.name());
  }
}

Eigen::MatrixXcd classical_matrix(ClassicalKind kind, const ClassicalParams& p, const MultiState& layout,
                                  const std::string& label) {
  const Axis& a = layout.axis(label);
  const double hb = a.grid.hbar, m = a.mass;
  const Eigen::MatrixXcd x = quadrature(layout, label, false), q = quadrature(layout, label, true);
  switch (kind) {
    case ClassicalKind::Translation: return expi(q, p.X0, hb);
    case ClassicalKind::Boost: return expi(p.t * q - m * x, p.v, hb);
    case ClassicalKind::Acceleration: {
      const double X = 0.5 * p.a * p.t * p.t, Xd = p.a * p.t;
      const double phase = -0.5 * m * p.a * p.a * p.t * p.t * p.t / 3.0 / hb;
      return std::polar(1.0, phase) * expi(x, -m * Xd, hb) * expi(q, X, hb);
    }
  }
  throw std::logic_error("classical_matrix: unknown kind");
}

double unitarity_defect(const Eigen::MatrixXcd& u) {
  return (u.adjoint() * u - Eigen::MatrixXcd::Identity(u.cols(), u.cols())).norm();
}

Eigen::MatrixXcd smooth_subspace(const MultiState& layout, int per_axis, const std::map<std::string, double>& width) {
  check_layout(layout);
  if (per_axis < 1 || per_axis > 4) throw std::invalid_argument("smooth_subspace: per_axis must be in 1..4");
  // width balancing position and spectral tails on n points
  const double s0 = std::sqrt(4.0 / M_PI);
  // (centre, momentum) offsets in cells and momentum cells
  const double off[4][2] = {{0.5, 0.5}, {-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}};
  std::vector<std::vector<Eigen::VectorXcd>> modes;
  for (const auto& a : layout.axes) {
    const int n = a.dim();
    const auto it = width.find(a.label);
    const double s = it == width.end() ? s0 : it->second;
    std::vector<Eigen::VectorXcd> m;
    if (a.kind == AxisKind::Discrete) {
      for (int k = 0; k < n; ++k) m.push_back(Eigen::VectorXcd::Unit(n, k));
    } else if (per_axis == 1) {
      Eigen::VectorXcd v(n);
      for (int k = 0; k < n; ++k) v(k) = std::exp(-std::pow(k - n / 2, 2) / (4.0 * s * s));
      m.push_back(v.normalized());
    } else {
      for (int j = 0; j < per_axis; ++j) {
        Eigen::VectorXcd v(n);
        for (int k = 0; k < n; ++k) {
          const double u = k - n / 2 - off[j][0];
          v(k) = std::polar(std::exp(-u * u / (4.0 * s * s)), 2.0 * M_PI * off[j][1] * u / n);
        }
        m.push_back(v.normalized());
      }
    }
    modes.push_back(std::move(m));
  }
  std::vector<Eigen::VectorXcd> cols{Eigen::VectorXcd::Ones(1)};
  for (const auto& m : modes) {
    std::vector<Eigen::VectorXcd> next;
    for (const auto& c : cols)
      for (const auto& v : m) next.push_back(Eigen::kroneckerProduct(c, v).eval());
    cols = std::move(next);
  }
  Eigen::MatrixXcd v(layout.size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) v.col(static_cast<Eigen::Index>(j)) = cols[j];
  return v;
}

double compressed_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& v) {
  return (v.adjoint() * (a - b) * v).norm();
}

ConjugationReport check_conjugation(const Eigen::MatrixXcd& u, const MultiState& in_layout,
                                    const MultiState& out_layout, const PhaseSpaceMap& m,
                                    const Eigen::MatrixXcd& v) {
  ConjugationReport rep;
  const std::size_t N = out_layout.size();
  std::vector<Eigen::MatrixXcd> zout;
  for (const auto& l : m.out_labels) {
    zout.push_back(quadrature(out_layout, l, false));
    zout.push_back(quadrature(out_layout, l, true));
  }
  for (int i = 0; i < m.dim(); ++i) {
    const std::string& l = m.in_labels[i / 2];
    const bool mom = i % 2 == 1;
    const Eigen::MatrixXcd lhs = u * quadrature(in_layout, l, mom) * u.adjoint();
    Eigen::MatrixXcd rhs = m.shift(i) * Eigen::MatrixXcd::Identity(N, N);
    for (int j = 0; j < m.dim(); ++j)
      if (m.M(i, j) != 0.0) rhs += m.M(i, j) * zout[j];
    const double e = compressed_distance(lhs, rhs, v);
    rep.entries.push_back({(mom ? "p_" : "x_") + l, e});
    rep.max_error = std::max(rep.max_error, e);
  }
  return rep;
}

}  // namespace qrf::dense

#include "qrf/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace qrf {

namespace {

double mass_of(const Masses& masses, const std::string& label) {
  auto it = masses.find(label);
  if (it == masses.end()) throw std::invalid_argument("missing mass for '" + label + "'");
  if (!(it->second > 0.0)) throw std::invalid_argument("mass of '" + label + "' must be positive");
  return it->second;
}

int find_label(const std::vector<std::string>& v, const std::string& l) {
  auto it = std::find(v.begin(), v.end(), l);
  return it == v.end() ? -1 : static_cast<int>(it - v.begin());
}

class Builder {
 public:
  Builder(std::string name, std::vector<std::string> in, std::vector<std::string> out) {
    if (in.size() != out.size()) throw std::invalid_argument("phase-space map needs equal label counts");
    m_.name = std::move(name);
    m_.in_labels = std::move(in);
    m_.out_labels = std::move(out);
    const int n = 2 * static_cast<int>(m_.in_labels.size());
    m_.M = Eigen::MatrixXd::Zero(n, n);
    m_.shift = Eigen::VectorXd::Zero(n);
    m_.symbolic.assign(n, std::vector<std::string>(n));
  }
  void set(const std::string& in, bool in_mom, const std::string& out, bool out_mom, double v, std::string sym) {
    const int r = 2 * find_label(m_.in_labels, in) + (in_mom ? 1 : 0);
    const int c = 2 * find_label(m_.out_labels, out) + (out_mom ? 1 : 0);
    if (r < 0 || c < 0) throw std::logic_error("Builder: bad label");
    m_.M(r, c) = v;
    m_.symbolic[r][c] = std::move(sym);
  }
  PhaseSpaceMap take() { return std::move(m_); }
  PhaseSpaceMap& map() { return m_; }

 private:
  PhaseSpaceMap m_;
};

std::string ms(const std::string& l) { return "m_" + l; }

void check_roles(const std::string& ref, const std::vector<std::string>& spectators, const std::string& old) {
  std::set<std::string> all(spectators.begin(), spectators.end());
  all.insert(ref);
  all.insert(old);
  if (all.size() != spectators.size() + 2) throw std::invalid_argument("frame-change labels must be distinct");
}

std::vector<std::string> in_of(const std::string& ref, const std::vector<std::string>& spectators) {
  std::vector<std::string> in{ref};
  in.insert(in.end(), spectators.begin(), spectators.end());
  return in;
}

std::vector<std::string> out_of(const std::vector<std::string>& spectators, const std::string& old) {
  std::vector<std::string> out = spectators;
  out.push_back(old);
  return out;
}

PhaseSpaceMap translation_family(const std::string& name, double s, bool time_terms, const Masses& masses,
                                 const std::string& R, const std::vector<std::string>& S, const std::string& O) {
  check_roles(R, S, O);
  Builder b(name, in_of(R, S), out_of(S, O));
  const double mR = time_terms ? mass_of(masses, R) : 1.0;
  const double mO = time_terms ? mass_of(masses, O) : 1.0;
  const std::string st = "(t-tau)";
  b.set(R, false, O, false, -1.0, "-1");
  b.set(R, true, O, true, -1.0, "-1");
  if (time_terms) {
    b.set(R, false, O, true, s / mO - s / mR, "((1/" + ms(O) + ") - (1/" + ms(R) + "))" + st);
  }
  for (const auto& sp : S) {
    b.set(R, true, sp, true, -1.0, "-1");
    b.set(sp, false, sp, false, 1.0, "1");
    b.set(sp, false, O, false, -1.0, "-1");
    b.set(sp, true, sp, true, 1.0, "1");
    if (time_terms) {
      b.set(R, false, sp, true, -s / mR, "-(1/" + ms(R) + ")" + st);
      b.set(sp, false, O, true, s / mO, "(1/" + ms(O) + ")" + st);
    }
  }
  PhaseSpaceMap m = b.take();
  m.masses = masses;
  return m;
}

}  // namespace

int PhaseSpaceMap::in_index(const std::string& label) const { return find_label(in_labels, label); }
int PhaseSpaceMap::out_index(const std::string& label) const { return find_label(out_labels, label); }

QuadObservable PhaseSpaceMap::image(const std::string& label, bool momentum) const {
  QuadObservable o = momentum ? QuadObservable::p(label) : QuadObservable::x(label);
  return conjugate_observable(*this, o);
}

PhaseSpaceMap PhaseSpaceMap::reordered(const std::vector<std::string>& in_order,
                                       const std::vector<std::string>& out_order) const {
  if (in_order.size() != in_labels.size() || out_order.size() != out_labels.size())
    throw std::invalid_argument("reordered: label count mismatch");
  PhaseSpaceMap r = *this;
  r.in_labels = in_order;
  r.out_labels = out_order;
  const int n = dim();
  std::vector<int> ri(n), ci(n);
  for (std::size_t i = 0; i < in_order.size(); ++i) {
    const int a = in_index(in_order[i]);
    const int b = out_index(out_order[i]);
    if (a < 0 || b < 0) throw std::invalid_argument("reordered: label sets differ");
    ri[2 * i] = 2 * a;
    ri[2 * i + 1] = 2 * a + 1;
    ci[2 * i] = 2 * b;
    ci[2 * i + 1] = 2 * b + 1;
  }
  for (int r0 = 0; r0 < n; ++r0) {
    r.shift(r0) = shift(ri[r0]);
    for (int c0 = 0; c0 < n; ++c0) r.M(r0, c0) = M(ri[r0], ci[c0]);
  }
  if (!symbolic.empty()) {
    for (int r0 = 0; r0 < n; ++r0)
      for (int c0 = 0; c0 < n; ++c0) r.symbolic[r0][c0] = symbolic[ri[r0]][ci[c0]];
  }
  return r;
}

Eigen::MatrixXd symplectic_form(int n_labels) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(2 * n_labels, 2 * n_labels);
  for (int i = 0; i < n_labels; ++i) {
    w(2 * i, 2 * i + 1) = 1.0;
    w(2 * i + 1, 2 * i) = -1.0;
  }
  return w;
}

double symplectic_defect(const PhaseSpaceMap& m) {
  const Eigen::MatrixXd w = symplectic_form(m.dim() / 2);
  return (m.M.transpose() * w * m.M - w).cwiseAbs().maxCoeff();
}

bool is_canonical(const PhaseSpaceMap& m, double tol) { return symplectic_defect(m) <= tol; }

PhaseSpaceMap identity_map(const std::vector<std::string>& labels) {
  Builder b("identity", labels, labels);
  for (const auto& l : labels) {
    b.set(l, false, l, false, 1.0, "1");
    b.set(l, true, l, true, 1.0, "1");
  }
  return b.take();
}

PhaseSpaceMap map_Sx(const std::string& ref, const std::vector<std::string>& spectators, const std::string& old) {
  return translation_family("Sx", 0.0, false, {}, ref, spectators, old);
}

PhaseSpaceMap map_ST(double t, double tau, const Masses& masses, const std::string& ref,
                     const std::vector<std::string>& spectators, const std::string& old) {
  PhaseSpaceMap m = translation_family("ST", t - tau, true, masses, ref, spectators, old);
  m.t = t;
  m.tau = tau;
  return m;
}

PhaseSpaceMap map_Sp(const std::string& R, const std::vector<std::string>& S, const std::string& O) {
  check_roles(R, S, O);
  Builder b("Sp", in_of(R, S), out_of(S, O));
  b.set(R, true, O, true, -1.0, "-1");
  b.set(R, false, O, false, -1.0, "-1");
  for (const auto& sp : S) {
    b.set(sp, true, sp, true, 1.0, "1");
    b.set(sp, true, O, true, -1.0, "-1");
    b.set(sp, false, sp, false, 1.0, "1");
    b.set(R, false, sp, false, -1.0, "-1");
  }
  return b.take();
}

PhaseSpaceMap map_Sb(double t, const Masses& masses, const std::string& R, const std::vector<std::string>& S,
                     const std::string& O) {
  check_roles(R, S, O);
  Builder b(t == 0.0 ? "Sb(t=0)" : "Sb", in_of(R, S), out_of(S, O));
  const double mR = mass_of(masses, R), mO = mass_of(masses, O);
  b.set(R, false, O, false, -mO / mR, "-(" + ms(O) + "/" + ms(R) + ")");
  b.set(R, true, O, true, -mR / mO, "-(" + ms(R) + "/" + ms(O) + ")");
  if (t != 0.0) b.set(R, false, O, true, t / mR - t / mO, "((1/" + ms(R) + ") - (1/" + ms(O) + ")) t");
  for (const auto& sp : S) {
    const double mS = mass_of(masses, sp);
    b.set(R, false, sp, false, -mS / mR, "-(" + ms(sp) + "/" + ms(R) + ")");
    if (t != 0.0) b.set(R, false, sp, true, t / mR, "(1/" + ms(R) + ") t");
    b.set(sp, false, sp, false, 1.0, "1");
    if (t != 0.0) b.set(sp, false, O, true, -t / mO, "-(1/" + ms(O) + ") t");
    b.set(sp, true, sp, true, 1.0, "1");
    b.set(sp, true, O, true, -mS / mO, "-(" + ms(sp) + "/" + ms(O) + ")");
  }
  PhaseSpaceMap m = b.take();
  m.t = t;
  m.masses = masses;
  return m;
}

PhaseSpaceMap map_Sv(const Masses& masses, const std::string& ref, const std::vector<std::string>& spectators,
                     const std::string& old) {
  PhaseSpaceMap m = map_Sb(0.0, masses, ref, spectators, old);
  m.name = "Sv";
  return m;
}

PhaseSpaceMap parity_map(const std::string& from, const std::string& to) {
  Builder b("parity", {from}, {to});
  b.set(from, false, to, false, -1.0, "-1");
  b.set(from, true, to, true, -1.0, "-1");
  return b.take();
}

PhaseSpaceMap velocity_parity_map(const std::string& from, const std::string& to, double m_from, double m_to) {
  if (!(m_from > 0.0) || !(m_to > 0.0)) throw std::invalid_argument("velocity parity needs positive masses");
  Builder b("velocity_parity", {from}, {to});
  b.set(from, false, to, false, -m_to / m_from, "-(" + ms(to) + "/" + ms(from) + ")");
  b.set(from, true, to, true, -m_from / m_to, "-(" + ms(from) + "/" + ms(to) + ")");
  return b.take();
}

PhaseSpaceMap generator_flow(const QuadObservable& G, double lambda, double /*hbar*/) {
  if (!G.is_hermitian()) throw std::invalid_argument("generator_flow: quadratic part must be symmetric");
  const int n = 2 * G.size();
  const Eigen::MatrixXd w = symplectic_form(G.size());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
  A.topLeftCorner(n, n) = w * (2.0 * G.quad);
  A.topRightCorner(n, 1) = w * G.lin;
  const Eigen::MatrixXd E = (lambda * A).exp();
  PhaseSpaceMap m;
  m.name = "flow";
  m.in_labels = G.labels;
  m.out_labels = G.labels;
  m.M = E.topLeftCorner(n, n);
  m.shift = E.topRightCorner(n, 1);
  return m;
}

PhaseSpaceMap extended(const PhaseSpaceMap& m, const std::vector<std::string>& extra) {
  std::vector<std::string> add;
  for (const auto& l : extra) {
    const bool in = m.in_index(l) >= 0, out = m.out_index(l) >= 0;
    if (in != out) throw std::invalid_argument("extended: label '" + l + "' appears on one side only");
    if (!in && std::find(add.begin(), add.end(), l) == add.end()) add.push_back(l);
  }
  if (add.empty()) return m;
  PhaseSpaceMap r = m;
  r.in_labels.insert(r.in_labels.end(), add.begin(), add.end());
  r.out_labels.insert(r.out_labels.end(), add.begin(), add.end());
  const int n0 = m.dim(), n = n0 + 2 * static_cast<int>(add.size());
  r.M = Eigen::MatrixXd::Identity(n, n);
  r.M.topLeftCorner(n0, n0) = m.M;
  r.shift = Eigen::VectorXd::Zero(n);
  r.shift.head(n0) = m.shift;
  if (!m.symbolic.empty()) {
    r.symbolic.assign(n, std::vector<std::string>(n));
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n0; ++j) r.symbolic[i][j] = m.symbolic[i][j];
    for (int i = n0; i < n; ++i) r.symbolic[i][i] = "1";
  }
  return r;
}

PhaseSpaceMap inverse(const PhaseSpaceMap& m) {
  PhaseSpaceMap r;
  r.name = m.name + "^-1";
  r.in_labels = m.out_labels;
  r.out_labels = m.in_labels;
  r.M = m.M.inverse();
  r.shift = -r.M * m.shift;
  r.t = m.t;
  r.tau = m.tau;
  r.masses = m.masses;
  return r;
}

PhaseSpaceMap compose(const PhaseSpaceMap& outer, const PhaseSpaceMap& inner) {
  std::set<std::string> a(outer.in_labels.begin(), outer.in_labels.end());
  std::set<std::string> b(inner.out_labels.begin(), inner.out_labels.end());
  if (a != b) throw std::invalid_argument("compose: label interfaces do not match");
  const PhaseSpaceMap o = outer.reordered(inner.out_labels, outer.out_labels);
  PhaseSpaceMap r;
  r.name = outer.name + "*" + inner.name;
  r.in_labels = inner.in_labels;
  r.out_labels = outer.out_labels;
  r.M = inner.M * o.M;
  r.shift = inner.M * o.shift + inner.shift;
  return r;
}

double map_distance(const PhaseSpaceMap& a, const PhaseSpaceMap& b) {
  const PhaseSpaceMap bb = b.reordered(a.in_labels, a.out_labels);
  return std::max((a.M - bb.M).cwiseAbs().maxCoeff(), (a.shift - bb.shift).cwiseAbs().maxCoeff());
}

QuadObservable conjugate_observable(const PhaseSpaceMap& m, const QuadObservable& obs) {
  const QuadObservable o = obs.over(m.in_labels);
  QuadObservable r(m.out_labels);
  const Eigen::VectorXd& d = m.shift;
  r.constant = o.constant + o.lin.dot(d) + d.dot(o.quad * d);
  r.lin = m.M.transpose() * o.lin + 2.0 * m.M.transpose() * (o.quad * d);
  r.quad = m.M.transpose() * o.quad * m.M;
  r.quad = 0.5 * (r.quad + r.quad.transpose()).eval();
  return r;
}

namespace {

Eigen::VectorXd flatten(const QuadObservable& o, const std::vector<std::string>& labels) {
  const QuadObservable a = o.over(labels);
  const int n = 2 * static_cast<int>(labels.size());
  Eigen::VectorXd v(1 + n + n * (n + 1) / 2);
  v(0) = a.constant;
  v.segment(1, n) = a.lin;
  int k = 1 + n;
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) v(k++) = i == j ? a.quad(i, i) : a.quad(i, j) + a.quad(j, i);
  return v;
}

}  // namespace

ConservedMapping map_conserved_set(const PhaseSpaceMap& m, const std::vector<QuadObservable>& set,
                                   const std::map<std::string, std::string>& swap) {
  std::vector<QuadObservable> targets;
  for (const auto& c : set) targets.push_back(c.pruned().relabeled(swap));
  return map_conserved_set(m, set, targets);
}

ConservedMapping map_conserved_set(const PhaseSpaceMap& m, const std::vector<QuadObservable>& set,
                                   const std::vector<QuadObservable>& targets) {
  if (targets.size() != set.size()) throw std::invalid_argument("map_conserved_set: one target per conserved quantity");
  ConservedMapping out;
  const int k = static_cast<int>(set.size());
  out.gamma = Eigen::MatrixXd::Zero(k, k);
  if (k == 0) return out;
  for (const auto& c : set) out.images.push_back(conjugate_observable(m, c));
  for (const auto& t : targets) out.targets.push_back(t.pruned());
  std::vector<std::string> labels = m.out_labels;
  for (const auto& t : out.targets)
    for (const auto& l : t.labels)
      if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
  std::vector<Eigen::VectorXd> imgs;
  for (const auto& im : out.images) imgs.push_back(flatten(im, labels));
  for (int i = 0; i < k; ++i) {
    const Eigen::VectorXd target = flatten(out.targets[i], labels);
    bool found = false;
    // minimal support: enumerate subsets by increasing size
    for (int size = 1; size <= k && !found; ++size) {
      std::vector<int> pick(size);
      for (int j = 0; j < size; ++j) pick[j] = j;
      while (true) {
        Eigen::MatrixXd A(target.size(), size);
        for (int j = 0; j < size; ++j) A.col(j) = imgs[pick[j]];
        const Eigen::VectorXd g = A.colPivHouseholderQr().solve(target);
        const double res = (A * g - target).cwiseAbs().maxCoeff();
        if (res <= 1e-10 * std::max(1.0, target.cwiseAbs().maxCoeff())) {
          for (int j = 0; j < size; ++j) out.gamma(i, pick[j]) = g(j);
          out.residual = std::max(out.residual, res);
          found = true;
          break;
        }
        int pos = size - 1;
        while (pos >= 0 && pick[pos] == k - size + pos) --pos;
        if (pos < 0) break;
        ++pick[pos];
        for (int j = pos + 1; j < size; ++j) pick[j] = pick[j - 1] + 1;
      }
    }
    if (!found) {
      out.ok = false;
      out.report += "no linear recombination of the images reproduces " +
                    format_observable(out.targets[i], true) + "\n";
    }
  }
  return out;
}

NaiveRelativeReport naive_relative_map(int N, const std::vector<double>& masses) {
  if (N < 2) throw std::invalid_argument("naive_relative_map: N must be at least 2");
  if (static_cast<int>(masses.size()) != N) throw std::invalid_argument("naive_relative_map: need N masses");
  for (double m : masses)
    if (!(m > 0.0)) throw std::invalid_argument("naive_relative_map: masses must be positive");
  NaiveRelativeReport r;
  r.N = N;
  r.R = Eigen::MatrixXd::Zero(2 * (N - 1), 2 * N);
  const double m0 = masses[0];
  for (int i = 1; i < N; ++i) {
    const double mi = masses[i];
    const double mu = mi * m0 / (mi + m0);
    r.R(2 * (i - 1), 2 * i) = 1.0;
    r.R(2 * (i - 1), 0) = -1.0;
    r.R(2 * (i - 1) + 1, 2 * i + 1) = mu / mi;
    r.R(2 * (i - 1) + 1, 1) = -mu / m0;
  }
  r.brackets = r.R * symplectic_form(N) * r.R.transpose();
  const Eigen::MatrixXd target = symplectic_form(N - 1);
  r.defect = (r.brackets - target).cwiseAbs().maxCoeff();
  r.canonical = r.defect <= 1e-12;
  for (int i = 0; i < 2 * (N - 1); ++i) {
    for (int j = i + 1; j < 2 * (N - 1); ++j) {
      if (std::abs(r.brackets(i, j) - target(i, j)) > 1e-12) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "{%s^r_%d, %s^r_%d} = %.12g", i % 2 ? "p" : "x", i / 2 + 1, j % 2 ? "p" : "x",
                      j / 2 + 1, r.brackets(i, j));
        r.offending.emplace_back(buf);
      }
    }
  }
  return r;
}

namespace {

std::string out_name(const std::string& label, bool mom) { return std::string(mom ? "pi_" : "q_") + label; }
std::string in_name(const std::string& label, bool mom) { return std::string(mom ? "p_" : "x_") + label; }

void append(std::string& s, const std::string& coef, const std::string& op) {
  std::string c = coef;
  bool neg = false;
  if (!c.empty() && c[0] == '-') {
    neg = true;
    c = c.substr(1);
  }
  if (s.empty())
    s += neg ? "-" : "";
  else
    s += neg ? " - " : " + ";
  if (c != "1") s += c + (op.empty() ? "" : " ");
  s += op;
}

std::string numeric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string print_map(const PhaseSpaceMap& m) {
  std::string out;
  const int n = m.dim();
  for (int r = 0; r < n; ++r) {
    std::string line;
    for (int c = 0; c < n; ++c) {
      if (m.M(r, c) == 0.0) continue;
      std::string coef = (!m.symbolic.empty() && !m.symbolic[r][c].empty()) ? m.symbolic[r][c] : numeric(m.M(r, c));
      append(line, coef, out_name(m.out_labels[c / 2], c % 2 == 1));
    }
    if (m.shift(r) != 0.0) {
      const double v = m.shift(r);
      line += line.empty() ? numeric(v) : (v < 0 ? " - " + numeric(-v) : " + " + numeric(v));
    }
    if (line.empty()) line = "0";
    out += in_name(m.in_labels[r / 2], r % 2 == 1) + " -> " + line + "\n";
  }
  return out;
}

}  // namespace qrf

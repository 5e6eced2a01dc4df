#include "qrf/observable.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace qrf {

QuadObservable::QuadObservable(std::vector<std::string> ls) : labels(std::move(ls)) {
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw std::invalid_argument("QuadObservable: duplicate label");
  const int n = 2 * static_cast<int>(labels.size());
  lin = Eigen::VectorXd::Zero(n);
  quad = Eigen::MatrixXd::Zero(n, n);
}

QuadObservable QuadObservable::x(const std::string& label) {
  QuadObservable o({label});
  o.lin(0) = 1.0;
  return o;
}

QuadObservable QuadObservable::p(const std::string& label) {
  QuadObservable o({label});
  o.lin(1) = 1.0;
  return o;
}

QuadObservable QuadObservable::scalar(double value) {
  QuadObservable o(std::vector<std::string>{});
  o.constant = value;
  return o;
}

int QuadObservable::index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

QuadObservable QuadObservable::over(const std::vector<std::string>& new_labels) const {
  QuadObservable out(new_labels);
  out.constant = constant;
  std::vector<int> pos(labels.size(), -1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    pos[i] = out.index(labels[i]);
    if (pos[i] < 0) {
      const bool used = lin.segment(2 * i, 2).cwiseAbs().maxCoeff() > 0.0 ||
                        quad.middleRows(2 * i, 2).cwiseAbs().maxCoeff() > 0.0;
      if (used) throw std::invalid_argument("observable references unknown label '" + labels[i] + "'");
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (pos[i] < 0) continue;
    for (int a = 0; a < 2; ++a) {
      out.lin(2 * pos[i] + a) = lin(2 * i + a);
      for (std::size_t j = 0; j < labels.size(); ++j) {
        if (pos[j] < 0) continue;
        for (int b = 0; b < 2; ++b) out.quad(2 * pos[i] + a, 2 * pos[j] + b) = quad(2 * i + a, 2 * j + b);
      }
    }
  }
  return out;
}

QuadObservable QuadObservable::relabeled(const std::map<std::string, std::string>& rename) const {
  QuadObservable out = *this;
  for (auto& l : out.labels) {
    auto it = rename.find(l);
    if (it != rename.end()) l = it->second;
  }
  std::set<std::string> seen(out.labels.begin(), out.labels.end());
  if (seen.size() != out.labels.size()) throw std::invalid_argument("relabel produced duplicate labels");
  return out;
}

QuadObservable QuadObservable::pruned(double tol) const {
  std::vector<std::string> keep;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool used = lin.segment(2 * i, 2).cwiseAbs().maxCoeff() > tol ||
                      quad.middleRows(2 * i, 2).cwiseAbs().maxCoeff() > tol;
    if (used) keep.push_back(labels[i]);
  }
  QuadObservable copy = *this;
  // zero out the sub-tolerance entries of dropped labels before re-embedding
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (std::find(keep.begin(), keep.end(), labels[i]) != keep.end()) continue;
    copy.lin.segment(2 * i, 2).setZero();
    copy.quad.middleRows(2 * i, 2).setZero();
    copy.quad.middleCols(2 * i, 2).setZero();
  }
  return copy.over(keep);
}

double QuadObservable::cx(const std::string& label) const {
  const int i = index(label);
  return i < 0 ? 0.0 : lin(2 * i);
}

double QuadObservable::cp(const std::string& label) const {
  const int i = index(label);
  return i < 0 ? 0.0 : lin(2 * i + 1);
}

double QuadObservable::qq(const std::string& a, bool a_mom, const std::string& b, bool b_mom) const {
  const int i = index(a), j = index(b);
  if (i < 0 || j < 0) return 0.0;
  return quad(2 * i + (a_mom ? 1 : 0), 2 * j + (b_mom ? 1 : 0));
}

bool QuadObservable::has_quadratic(double tol) const {
  return quad.size() > 0 && quad.cwiseAbs().maxCoeff() > tol;
}

bool QuadObservable::position_only(double tol) const {
  for (int i = 0; i < size(); ++i) {
    if (std::abs(lin(2 * i + 1)) > tol) return false;
    for (int j = 0; j < 2 * size(); ++j) {
      if (std::abs(quad(2 * i + 1, j)) > tol || std::abs(quad(j, 2 * i + 1)) > tol) return false;
    }
  }
  return true;
}

bool QuadObservable::momentum_only(double tol) const {
  for (int i = 0; i < size(); ++i) {
    if (std::abs(lin(2 * i)) > tol) return false;
    for (int j = 0; j < 2 * size(); ++j) {
      if (std::abs(quad(2 * i, j)) > tol || std::abs(quad(j, 2 * i)) > tol) return false;
    }
  }
  return true;
}

bool QuadObservable::is_hermitian(double tol) const {
  return quad.size() == 0 || (quad - quad.transpose()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

std::vector<std::string> merged_labels(const QuadObservable& a, const QuadObservable& b) {
  std::vector<std::string> out = a.labels;
  for (const auto& l : b.labels)
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  return out;
}

}  // namespace

QuadObservable operator+(const QuadObservable& a, const QuadObservable& b) {
  const auto labels = merged_labels(a, b);
  QuadObservable x = a.over(labels), y = b.over(labels);
  x.lin += y.lin;
  x.quad += y.quad;
  x.constant += y.constant;
  return x;
}

QuadObservable operator-(const QuadObservable& a) { return (-1.0) * a; }

QuadObservable operator-(const QuadObservable& a, const QuadObservable& b) { return a + (-1.0) * b; }

QuadObservable operator*(double s, const QuadObservable& a) {
  QuadObservable out = a;
  out.lin *= s;
  out.quad *= s;
  out.constant *= s;
  return out;
}

QuadObservable operator+(const QuadObservable& a, double c) {
  QuadObservable out = a;
  out.constant += c;
  return out;
}

QuadObservable sym_product(const QuadObservable& a, const QuadObservable& b) {
  if (a.has_quadratic() || b.has_quadratic())
    throw std::invalid_argument("sym_product: operands must be affine");
  const auto labels = merged_labels(a, b);
  QuadObservable x = a.over(labels), y = b.over(labels);
  QuadObservable out(labels);
  out.quad = 0.5 * (x.lin * y.lin.transpose() + y.lin * x.lin.transpose());
  out.lin = x.constant * y.lin + y.constant * x.lin;
  out.constant = x.constant * y.constant;
  return out;
}

double coefficient_distance(const QuadObservable& a, const QuadObservable& b) {
  const auto labels = merged_labels(a, b);
  QuadObservable x = a.over(labels), y = b.over(labels);
  double d = std::abs(x.constant - y.constant);
  if (x.lin.size() > 0) {
    d = std::max(d, (x.lin - y.lin).cwiseAbs().maxCoeff());
    d = std::max(d, (x.quad - y.quad).cwiseAbs().maxCoeff());
  }
  return d;
}

namespace {

std::string op_name(const std::string& label, bool mom, bool primed) {
  if (primed) return std::string(mom ? "pi_" : "q_") + label;
  return std::string(mom ? "p_" : "x_") + label;
}

void append_term(std::string& s, double c, const std::string& name) {
  if (std::abs(c) < 1e-14) return;
  char buf[64];
  const double mag = std::abs(c);
  const bool unit = std::abs(mag - 1.0) < 1e-14;
  if (s.empty()) {
    if (c < 0) s += "-";
  } else {
    s += c < 0 ? " - " : " + ";
  }
  if (name.empty()) {
    std::snprintf(buf, sizeof buf, "%.12g", mag);
    s += buf;
    return;
  }
  if (!unit) {
    std::snprintf(buf, sizeof buf, "%.12g ", mag);
    s += buf;
  }
  s += name;
}

}  // namespace

std::string format_observable(const QuadObservable& o, bool primed) {
  std::string s;
  const int n = o.size();
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 2; ++a) append_term(s, o.lin(2 * i + a), op_name(o.labels[i], a == 1, primed));
  for (int i = 0; i < 2 * n; ++i) {
    for (int j = i; j < 2 * n; ++j) {
      const double c = i == j ? o.quad(i, i) : o.quad(i, j) + o.quad(j, i);
      const std::string a = op_name(o.labels[i / 2], i % 2 == 1, primed);
      const std::string b = op_name(o.labels[j / 2], j % 2 == 1, primed);
      append_term(s, c, i == j ? a + "^2" : a + " " + b);
    }
  }
  append_term(s, o.constant, "");
  return s.empty() ? "0" : s;
}

}  // namespace qrf

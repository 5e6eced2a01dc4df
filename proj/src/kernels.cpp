#include "qrf/kernels.hpp"

#include <cmath>

#include "qrf/parallel.hpp"

namespace qrf {

namespace {

struct Access {
  std::vector<std::size_t> stride;
  std::vector<int> dim;
  std::vector<std::vector<double>> coord;
};

Access access(const MultiState& s, const std::vector<std::string>& labels) {
  Access a;
  const auto strides = s.strides();
  for (const auto& l : labels) {
    const int ax = s.axis_index(l);
    const Axis& axis = s.axes[ax];
    a.stride.push_back(strides[ax]);
    a.dim.push_back(axis.dim());
    std::vector<double> c(axis.dim());
    for (int i = 0; i < axis.dim(); ++i) c[i] = axis.coord(i);
    a.coord.push_back(std::move(c));
  }
  return a;
}

}  // namespace

void multiply_factor(MultiState& s, const std::vector<std::string>& labels, const CoordCFn& factor) {
  const Access a = access(s, labels);
  const std::size_t k = labels.size();
  const std::size_t total = s.amp.size();
  const std::size_t block = 256;
  parallel_for((total + block - 1) / block, [&](std::size_t b) {
    std::vector<double> c(k);
    const std::size_t hi = std::min(total, (b + 1) * block);
    for (std::size_t f = b * block; f < hi; ++f) {
      for (std::size_t j = 0; j < k; ++j) c[j] = a.coord[j][(f / a.stride[j]) % a.dim[j]];
      s.amp[f] *= factor(c.data());
    }
  });
}

void multiply_phase(MultiState& s, const std::vector<std::string>& labels, const CoordFn& phase) {
  multiply_factor(s, labels, [&](const double* c) { return std::polar(1.0, phase(c)); });
}

void set_rep(MultiState& s, const std::vector<std::string>& labels, Rep rep) {
  for (const auto& l : labels) {
    const int ax = s.axis_index(l);
    Axis& a = s.axes[ax];
    if (a.kind != AxisKind::Continuous || a.rep == rep) continue;
    dft_axis_inplace(s, ax, rep == Rep::Momentum);
    a.rep = rep;
  }
}

void restore_reps(MultiState& s, const MultiState& like) {
  for (const auto& a : like.axes)
    if (s.has(a.label)) set_rep(s, {a.label}, a.rep);
}

std::vector<double> marginal_in(const MultiState& s, const std::string& label, Rep rep) {
  if (s.axis(label).kind != AxisKind::Continuous || s.axis(label).rep == rep) return marginal(s, label);
  MultiState w = s;
  set_rep(w, {label}, rep);
  return marginal(w, label);
}

}  // namespace qrf

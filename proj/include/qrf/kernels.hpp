#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qrf/grid.hpp"

namespace qrf {

// Coordinates handed to kernels follow the order of `labels`, each in the axis'
// current representation (x or p for continuous axes, omega or level index otherwise).
using CoordFn = std::function<double(const double*)>;
using CoordCFn = std::function<cplx(const double*)>;

// amp *= exp(i * phase(coords))
void multiply_phase(MultiState& s, const std::vector<std::string>& labels, const CoordFn& phase);
void multiply_factor(MultiState& s, const std::vector<std::string>& labels, const CoordCFn& factor);

// Puts every listed continuous axis into `rep`.
void set_rep(MultiState& s, const std::vector<std::string>& labels, Rep rep);
// Restores each axis to the representation recorded in `like`.
void restore_reps(MultiState& s, const MultiState& like);

// Probability mass per basis index of an axis in a given representation.
std::vector<double> marginal_in(const MultiState& s, const std::string& label, Rep rep);

}  // namespace qrf

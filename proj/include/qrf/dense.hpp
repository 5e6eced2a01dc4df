#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrf/grid.hpp"
#include "qrf/operators.hpp"
#include "qrf/phase_space.hpp"

// Explicit matrices on tiny grids. All matrices act on amplitude vectors of a
// layout whose continuous axes are in the position representation.
namespace qrf::dense {

constexpr std::size_t kMaxDim = 4096;

Eigen::MatrixXcd dft_1d(int n);
// 1 x .. x op x .. x 1 with op on the axis `label`.
Eigen::MatrixXcd on_axis(const MultiState& layout, const std::string& label, const Eigen::MatrixXcd& op);
// Discretized x (momentum=false) or p of a continuous axis; omega of a photon axis.
Eigen::MatrixXcd quadrature(const MultiState& layout, const std::string& label, bool momentum);
// f(coords) diagonal in the listed representations (non-continuous axes use their native basis).
Eigen::MatrixXcd function_operator(const MultiState& layout, const std::vector<std::string>& labels,
                                   const std::vector<Rep>& reps, const std::function<double(const double*)>& f);
// Columns are f(e_k): the matrix of an arbitrary state map.
Eigen::MatrixXcd matrix_of(const MultiState& layout, const std::function<MultiState(const MultiState&)>& f);
// exp(i lambda G / hbar)
Eigen::MatrixXcd expi(const Eigen::MatrixXcd& G, double lambda, double hbar = 1.0);
Eigen::MatrixXcd parity_permutation(const MultiState& layout, const std::string& label);
// (Omega T + T Omega)/2 on one photon axis, T the spectral conjugate of omega.
Eigen::MatrixXcd dilation_generator(const Axis& photon);

MultiState layout_after(const QrfUnitary& u, const MultiState& in_layout);
// Built from matrix exponentials of the discretized generators of each factor.
Eigen::MatrixXcd dense_matrix(const QrfUnitary& u, const MultiState& in_layout);
Eigen::MatrixXcd classical_matrix(ClassicalKind kind, const ClassicalParams& p, const MultiState& layout,
                                  const std::string& label);

CVec to_vector(const MultiState& s);
MultiState from_vector(const MultiState& layout, const Eigen::VectorXcd& v);
Eigen::VectorXcd as_eigen(const MultiState& s);

double unitarity_defect(const Eigen::MatrixXcd& u);
// Unit-norm products of Gaussian test packets, `per_axis` (1..4) per axis, near the grid centre and
// displaced by half a cell in x and p. `width` is the spread in cells (default balances x and p tails).
Eigen::MatrixXcd smooth_subspace(const MultiState& layout, int per_axis = 2,
                                 const std::map<std::string, double>& width = {});
// || V^dagger (a - b) V ||_F
double compressed_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, const Eigen::MatrixXcd& v);

struct ConjugationEntry {
  std::string op;
  double error = 0.0;
};
struct ConjugationReport {
  std::vector<ConjugationEntry> entries;
  double max_error = 0.0;
};
// Compares U z_in U^dagger with M z_out + shift for every in-quadrature of the map.
ConjugationReport check_conjugation(const Eigen::MatrixXcd& u, const MultiState& in_layout,
                                    const MultiState& out_layout, const PhaseSpaceMap& m, const Eigen::MatrixXcd& v);

}  // namespace qrf::dense

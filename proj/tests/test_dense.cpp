#include <random>

#include "doctest.h"
#include "qrf/dense.hpp"

using namespace qrf;

namespace {

struct Case {
  UnitaryKind kind;
  double dx_a, dx_b;
  Masses masses;
};

// Grid spacings per operator keep each conjugated quadrature away from the periodic seam on
// the smooth test subspace.
const std::vector<Case>& cases() {
  static const std::vector<Case> c = {
      {UnitaryKind::Sx, 0.25, 0.5, {{"A", 1.0}, {"B", 1.0}, {"C", 2.0}}},
      {UnitaryKind::Sp, 0.5, 0.25, {{"A", 1.0}, {"B", 1.0}, {"C", 2.0}}},
      {UnitaryKind::ST, 0.25, 0.5, {{"A", 1.0}, {"B", 1.0}, {"C", 2.0}}},
      {UnitaryKind::Sb, 0.5, 0.25, {{"A", 4.0}, {"B", 1.0}, {"C", 2.0}}},
      {UnitaryKind::Sv, 0.5, 0.25, {{"A", 4.0}, {"B", 1.0}, {"C", 2.0}}},
  };
  return c;
}

MultiState layout_for(const Case& c) {
  MultiState s = tensor({sharp_state(Grid1D(16, c.dx_a), 0.0, "A", c.masses.at("A")),
                         sharp_state(Grid1D(16, c.dx_b), 0.0, "B", c.masses.at("B"))});
  s.frame = "C";
  s.frame_mass = c.masses.at("C");
  return s;
}

QrfUnitary unitary_for(const Case& c) {
  QrfUnitary u;
  u.kind = c.kind;
  u.t = 0.1;
  u.tau = 0.0;
  u.masses = c.masses;
  return u;
}

MultiState random_state(const MultiState& layout, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  MultiState s = layout;
  for (auto& a : s.amp) a = cplx(nd(rng), nd(rng));
  return normalized(s);
}

}  // namespace

TEST_CASE("dense matrices are unitary and conjugate quadratures into the map images") {
  for (const Case& c : cases()) {
    const MultiState lay = layout_for(c);
    const QrfUnitary u = unitary_for(c);
    CAPTURE(u.name());
    const Eigen::MatrixXcd U = dense::dense_matrix(u, lay);
    CHECK(dense::unitarity_defect(U) <= 1e-8);
    const MultiState out = dense::layout_after(u, lay);
    const dense::ConjugationReport rep = dense::check_conjugation(U, lay, out, *u.map(), dense::smooth_subspace(out, 2));
    CHECK(rep.entries.size() == 4);
    CHECK(rep.max_error <= 1e-6);
  }
}

TEST_CASE("grid application agrees with the dense matrix") {
  for (const Case& c : cases()) {
    const MultiState lay = layout_for(c);
    const QrfUnitary u = unitary_for(c);
    CAPTURE(u.name());
    const Eigen::MatrixXcd U = dense::dense_matrix(u, lay);
    if (c.kind == UnitaryKind::Sb) {
      // the slice-wise factorization of exp(i v G) is exact only where the discretized
      // x and p obey the canonical commutator, so compare on smooth states
      const Eigen::MatrixXcd A = dense::matrix_of(lay, [&](const MultiState& s) { return apply(u, s); });
      CHECK(dense::compressed_distance(A, U, dense::smooth_subspace(lay, 2)) <= 1e-6);
      continue;
    }
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const MultiState s = random_state(lay, seed);
      const MultiState direct = all_position(apply(u, s));
      const Eigen::VectorXcd via = U * dense::as_eigen(s);
      worst = std::max(worst, (dense::as_eigen(direct) - via).norm());
    }
    CHECK(worst <= 1e-8);
  }
}

TEST_CASE("S_b at t = 0 is S_v") {
  const Case& c = cases()[3];
  QrfUnitary b = unitary_for(c), v = unitary_for(c);
  b.t = 0.0;
  v.kind = UnitaryKind::Sv;
  const MultiState lay = layout_for(c);
  CHECK((dense::dense_matrix(b, lay) - dense::dense_matrix(v, lay)).norm() < 1e-12);
}

TEST_CASE("parity swap is a permutation") {
  const MultiState lay = sharp_state(Grid1D(16, 0.5), 0.0, "A");
  const Eigen::MatrixXcd P = dense::parity_permutation(lay, "A");
  for (int j = 0; j < 16; ++j) {
    int ones = 0;
    for (int i = 0; i < 16; ++i) {
      if (std::abs(P(i, j)) == 1.0) ++ones;
      else CHECK(P(i, j) == cplx(0.0));
    }
    CHECK(ones == 1);
  }
  CHECK((P * P - Eigen::MatrixXcd::Identity(16, 16)).norm() == 0.0);
}

TEST_CASE("boost factorization matches the matrix exponential") {
  const Grid1D g(32, 0.3);
  const MultiState lay = sharp_state(g, 0.0, "B", 2.0);
  const ClassicalParams p{0.0, 0.4, 0.7, 0.0};
  const Eigen::MatrixXcd E = dense::classical_matrix(ClassicalKind::Boost, p, lay, "B");
  const Eigen::MatrixXcd V = dense::smooth_subspace(lay, 4);
  const Eigen::MatrixXcd A = dense::matrix_of(lay, [&](const MultiState& s) {
    return classical_oracle(ClassicalKind::Boost, p, s, "B");
  });
  CHECK(dense::compressed_distance(A, E, V) < 1e-6);
  // boost moves <p> by -m v and <x> by -v t on a smooth packet
  const MultiState s = dense::from_vector(lay, V.col(0));
  const MultiState b = dense::from_vector(lay, E * V.col(0));
  CHECK(std::abs(mean_p(b, "B") - mean_p(s, "B") + 2.0 * 0.4) < 1e-6);
  CHECK(std::abs(mean_x(b, "B") - mean_x(s, "B") + 0.4 * 0.7) < 1e-6);
}

TEST_CASE("photon frequency under S_D") {
  const double c = 137.0;
  const Axis ph = Axis::photon("B", 16, 1.0, 0.05);
  for (const double m : {1.0, 10.0}) {
    CAPTURE(m);
    const MultiState lay = from_amplitudes({Axis::continuous("C", Grid1D(16, 0.5), m), ph}, CVec(256, 0.0), "A", m);
    QrfUnitary u;
    u.kind = UnitaryKind::SD;
    u.c = c;
    u.t = 0.1;
    u.roles = {"A", {"B"}, "C"};
    const Eigen::MatrixXcd U = dense::dense_matrix(u, lay);
    CHECK(dense::unitarity_defect(U) <= 1e-8);
    const MultiState out = dense::layout_after(u, lay);
    const Eigen::MatrixXcd W = dense::quadrature(lay, "B", false), Wo = dense::quadrature(out, "B", false);
    auto doppler = [&](auto f) { return dense::function_operator(out, {"A"}, {Rep::Momentum}, f); };
    const Eigen::MatrixXcd exact = Wo * doppler([&](const double* p) { return 1.0 / (1.0 - p[0] / (c * m)); });
    const Eigen::MatrixXcd first = Wo * doppler([&](const double* p) { return 1.0 + p[0] / (c * m); });
    const Eigen::MatrixXcd V = dense::smooth_subspace(out, 2);
    const Eigen::MatrixXcd image = U * W * U.adjoint();
    CHECK(dense::compressed_distance(image, exact, V) < 1e-8);
    // the first-order form differs at O((p / m c)^2)
    const double d1 = dense::compressed_distance(image, first, V);
    CHECK(d1 < (m > 1.0 ? 1e-4 : 1e-3));
    CHECK(d1 > 0.0);
  }
}

TEST_CASE("dimension guard") {
  const MultiState big = tensor({sharp_state(Grid1D(128, 0.1), 0.0, "A"), sharp_state(Grid1D(64, 0.1), 0.0, "B")});
  QrfUnitary u;
  u.kind = UnitaryKind::Sx;
  CHECK_THROWS(dense::dense_matrix(u, big));
}

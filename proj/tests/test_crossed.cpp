#include "doctest.h"
#include "takdual/crossed.hpp"
#include "takdual/measure.hpp"

#include <cmath>
#include <memory>
#include <numbers>

using namespace takdual;
using crossed::GroupAction;
using groups::DualGroup;
using groups::FiniteAbelianGroup;
using num::Cplx;
using num::Mat;
using vna::OperatorAlgebra;

namespace {

Mat sigma_z() {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

GroupAction qubit_action() {
  FiniteAbelianGroup g({2});
  auto m2 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
  return GroupAction::from_generator_unitaries(g, m2, {sigma_z()}, 1e-9);
}

GroupAction qutrit_action() {
  FiniteAbelianGroup g({3});
  const Cplx w = std::exp(Cplx(0, 2.0 * std::numbers::pi / 3.0));
  Mat d = Mat::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = w;
  d(2, 2) = w * w;
  auto m3 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(3));
  return GroupAction::from_generator_unitaries(g, m3, {d}, 1e-9);
}

kt::SpectralMeasure qubit_measure(const GroupAction& action, const DualGroup& dual) {
  return kt::spectral_measure(
      OperatorAlgebra::diagonal(2), action.group(),
      [&](int u) { return action.implementer(u); }, dual, 1e-9);
}

}  // namespace

TEST_CASE("group action validation") {
  FiniteAbelianGroup g({2});
  auto m2 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
  SUBCASE("a non-involutive unitary fails the composition law for Z_2") {
    Mat bad = Mat::Zero(2, 2);
    bad(0, 0) = 1.0;
    bad(1, 1) = Cplx(0, 1);  // order 4
    CHECK_THROWS_AS(
        (void)GroupAction::from_generator_unitaries(g, m2, {bad}, 1e-9),
        num::PreconditionError);
  }
  SUBCASE("automorphism must preserve the algebra") {
    auto diag = std::make_shared<OperatorAlgebra>(OperatorAlgebra::diagonal(2));
    Mat had(2, 2);
    had << 1, 1, 1, -1;
    had /= std::sqrt(2.0);
    CHECK_THROWS_AS((void)GroupAction::from_generator_unitaries(g, diag, {had}, 1e-9),
                    num::PreconditionError);
  }
  SUBCASE("inner flag reflects membership of the implementers") {
    CHECK(qubit_action().inner());
    auto diag = std::make_shared<OperatorAlgebra>(OperatorAlgebra::diagonal(2));
    Mat flip = Mat::Zero(2, 2);
    flip(0, 1) = flip(1, 0) = 1.0;  // permutes the diagonal algebra, not inside it
    auto a = GroupAction::from_generator_unitaries(g, diag, {flip}, 1e-9);
    CHECK(!a.inner());
  }
}

TEST_CASE("crossed product closed forms") {
  SUBCASE("trivial action of Z_3 on scalars gives C^3") {
    FiniteAbelianGroup g({3});
    auto c1 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::scalars(1));
    auto action = GroupAction::trivial(g, c1);
    auto cp = crossed::crossed_product(action, 1e-9);
    CHECK(cp.invariant.to_string() == "{(1,1),(1,1),(1,1)}");
    CHECK(cp.algebra.is_abelian(1e-9));
  }
  SUBCASE("M_2 with Ad(sigma_z) over Z_2: two 2x2 blocks") {
    auto cp = crossed::crossed_product(qubit_action(), 1e-9);
    CHECK(cp.invariant.to_string() == "{(2,1),(2,1)}");
    CHECK(cp.covariance_residual < 1e-12);
    // matches A (x) B(l^2(Z_2)) with A the diagonal MASA
    auto amp = crossed::amplification(OperatorAlgebra::diagonal(2),
                                      cp.action.group(), 1e-9);
    CHECK(vna::sector_decompose(amp, 1e-9).invariant().abstract_equal(cp.invariant));
  }
  SUBCASE("trivial group leaves M unchanged") {
    FiniteAbelianGroup g({1});
    auto m2 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
    auto action = GroupAction::trivial(g, m2);
    auto cp = crossed::crossed_product(action, 1e-9);
    CHECK(cp.invariant.to_string() == "{(2,1)}");
    CHECK(cp.algebra.linear_dim() == 4);
  }
}

TEST_CASE("covariant embedding is an injective *-homomorphism") {
  auto action = qubit_action();
  num::Rng rng(37);
  for (int t = 0; t < 4; ++t) {
    Mat x = rng.gaussian_matrix(2, 2);
    Mat y = rng.gaussian_matrix(2, 2);
    Mat px = crossed::covariant_embedding(action, x);
    Mat py = crossed::covariant_embedding(action, y);
    CHECK((px * py - crossed::covariant_embedding(action, x * y)).norm() < 1e-12);
    CHECK((px.adjoint() - crossed::covariant_embedding(action, x.adjoint())).norm() <
          1e-12);
    // injective: the embedding scales norms by sqrt(|U|)
    CHECK(px.norm() == doctest::Approx(std::sqrt(2.0) * x.norm()));
  }
}

TEST_CASE("covariant embedding agrees with EW conjugation for inner actions") {
  auto action = qubit_action();
  DualGroup dual(action.group());
  auto e = qubit_measure(action, dual);
  Mat ew = kt::coupling_ew(e, action.group(), dual);
  num::Rng rng(17);
  for (int t = 0; t < 4; ++t) {
    Mat x = rng.gaussian_matrix(2, 2);
    Mat via_ew = ew * num::kron(x, Mat::Identity(2, 2)) * ew.adjoint();
    Mat direct = crossed::covariant_embedding(action, x);
    CHECK((via_ew - direct).norm() < 1e-12);
  }
}

TEST_CASE("convolution algebra") {
  auto action = qubit_action();
  const int n = 2;
  num::Rng rng(23);
  auto random_fn = [&]() {
    crossed::MFunction f(n);
    for (int u = 0; u < n; ++u) f[static_cast<size_t>(u)] = rng.gaussian_matrix(2, 2);
    return f;
  };

  SUBCASE("delta_e is a two-sided unit") {
    auto unit = crossed::delta_unit(action);
    auto x = random_fn();
    auto l = crossed::convolution_product(unit, x, action);
    auto r = crossed::convolution_product(x, unit, action);
    for (int u = 0; u < n; ++u) {
      CHECK((l[static_cast<size_t>(u)] - x[static_cast<size_t>(u)]).norm() < 1e-13);
      CHECK((r[static_cast<size_t>(u)] - x[static_cast<size_t>(u)]).norm() < 1e-13);
    }
  }
  SUBCASE("scalar-valued functions on Z_2 under the trivial action reduce to the group algebra") {
    FiniteAbelianGroup g({2});
    auto c1 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::scalars(1));
    auto triv = GroupAction::trivial(g, c1);
    crossed::MFunction x(2), y(2);
    x[0] = Mat::Constant(1, 1, 2.0);
    x[1] = Mat::Constant(1, 1, 3.0);
    y[0] = Mat::Constant(1, 1, 5.0);
    y[1] = Mat::Constant(1, 1, 7.0);
    auto conv = crossed::convolution_product(x, y, triv);
    // hand oracle: (x*y)(0) = x0 y0 + x1 y1, (x*y)(1) = x0 y1 + x1 y0
    CHECK(std::abs(conv[0](0, 0) - Cplx(2 * 5 + 3 * 7, 0)) < 1e-13);
    CHECK(std::abs(conv[1](0, 0) - Cplx(2 * 7 + 3 * 5, 0)) < 1e-13);
  }
  SUBCASE("involution is an anti-homomorphism of period two") {
    auto x = random_fn();
    auto y = random_fn();
    auto xs = crossed::involution(x, action);
    auto xss = crossed::involution(xs, action);
    for (int u = 0; u < n; ++u)
      CHECK((xss[static_cast<size_t>(u)] - x[static_cast<size_t>(u)]).norm() < 1e-13);
    auto conv_s = crossed::involution(crossed::convolution_product(x, y, action), action);
    auto swapped = crossed::convolution_product(crossed::involution(y, action),
                                                crossed::involution(x, action), action);
    for (int u = 0; u < n; ++u)
      CHECK((conv_s[static_cast<size_t>(u)] - swapped[static_cast<size_t>(u)]).norm() <
            1e-12);
  }
  SUBCASE("associativity") {
    auto x = random_fn();
    auto y = random_fn();
    auto z = random_fn();
    auto l = crossed::convolution_product(crossed::convolution_product(x, y, action), z,
                                          action);
    auto r = crossed::convolution_product(x, crossed::convolution_product(y, z, action),
                                          action);
    for (int u = 0; u < n; ++u)
      CHECK((l[static_cast<size_t>(u)] - r[static_cast<size_t>(u)]).norm() < 1e-12);
  }
}

TEST_CASE("operator-valued Fourier transform") {
  auto action = qubit_action();
  num::Rng rng(29);
  auto random_fn = [&]() {
    crossed::MFunction f(2);
    for (int u = 0; u < 2; ++u) f[static_cast<size_t>(u)] = rng.gaussian_matrix(2, 2);
    return f;
  };

  SUBCASE("unit maps to the identity, point mass at e to the embedding") {
    auto unit = crossed::delta_unit(action);
    CHECK((crossed::op_fourier(unit, action) - Mat::Identity(4, 4)).norm() < 1e-13);
    Mat a = rng.gaussian_matrix(2, 2);
    crossed::MFunction f(2, Mat::Zero(2, 2));
    f[0] = a;
    CHECK((crossed::op_fourier(f, action) - crossed::covariant_embedding(action, a))
              .norm() < 1e-13);
  }
  SUBCASE("homomorphism and involution properties") {
    for (int t = 0; t < 4; ++t) {
      auto x = random_fn();
      auto y = random_fn();
      Mat lhs = crossed::op_fourier(crossed::convolution_product(x, y, action), action);
      Mat rhs = crossed::op_fourier(x, action) * crossed::op_fourier(y, action);
      CHECK((lhs - rhs).norm() < 1e-11);
      Mat inv = crossed::op_fourier(crossed::involution(x, action), action);
      CHECK((inv - crossed::op_fourier(x, action).adjoint()).norm() < 1e-12);
    }
  }
  SUBCASE("bijection onto the crossed product: dimension count dim(M)|U|") {
    auto cp = crossed::crossed_product(qubit_action(), 1e-9);
    CHECK(cp.algebra.linear_dim() == 4 * 2);
    // images of the delta functions at each (matrix unit, group element) span
    std::vector<Mat> images;
    auto m2 = OperatorAlgebra::full(2);
    for (int u = 0; u < 2; ++u)
      for (const Mat& b : m2.basis()) {
        crossed::MFunction f(2, Mat::Zero(2, 2));
        f[static_cast<size_t>(u)] = b;
        images.push_back(crossed::op_fourier(f, action));
      }
    auto span = num::MatSubspace::from_span(images, 1e-10);
    CHECK(span.dim() == 8);
    CHECK(span.equals(cp.algebra.subspace(), 1e-8));
  }
}

TEST_CASE("dual action on the crossed product") {
  auto action = qubit_action();
  DualGroup dual(action.group());
  auto cp = crossed::crossed_product(action, 1e-9);
  auto hat = crossed::dual_action(cp, dual, 1e-9);

  SUBCASE("iota acts trivially, sgn flips the sign of lambda_u") {
    Mat lam = cp.lambda(1);
    CHECK((hat.apply(0, lam) - lam).norm() < 1e-13);
    CHECK((hat.apply(1, lam) + lam).norm() < 1e-13);
    Mat pix = cp.pi(sigma_z());
    CHECK((hat.apply(1, pix) - pix).norm() < 1e-13);
  }
  SUBCASE("cross-validation against the coaction form Ad(1 (x) sW*s)") {
    CHECK(crossed::dual_coaction_residual(cp, dual) < 1e-11);
  }
  SUBCASE("fixed points of the dual action are exactly pi_alpha(M)") {
    auto fixed = crossed::fixed_point_algebra(hat, 1e-9);
    std::vector<Mat> pi_m;
    for (const Mat& b : action.algebra().basis()) pi_m.push_back(cp.pi(b));
    auto pim_span = num::MatSubspace::from_span(pi_m, 1e-10);
    CHECK(fixed.subspace().equals(pim_span, 1e-8));
  }
}

// For an inner action generating the MASA, the centre of M x| U is the copy
// of A twisted by the dual characters: it is spanned by the projections
// q_chi = (1/|U|) sum_u conj(chi(u)) E(u)^dagger (x) lambda_u.
TEST_CASE("center of the crossed product is the character-twisted MASA copy") {
  auto action = qubit_action();
  DualGroup dual(action.group());
  auto e = qubit_measure(action, dual);
  auto cp = crossed::crossed_product(action, 1e-9);
  auto z = vna::center(cp.algebra, 1e-9);
  CHECK(z.linear_dim() == 2);  // |Spec(A)|

  const int n = action.group().order();
  std::vector<Mat> q_chi;
  for (int c = 0; c < dual.size(); ++c) {
    groups::Character chi = dual.character(c);
    Mat q = Mat::Zero(4, 4);
    for (int u = 0; u < n; ++u)
      q += std::conj(chi(u)) * num::kron(e.embedded_unitary(dual, u).adjoint().eval(),
                                         action.group().left_translation(u));
    q /= static_cast<double>(n);
    // each q_chi is a projection
    CHECK((q * q - q).norm() < 1e-12);
    q_chi.push_back(std::move(q));
  }
  auto span = num::MatSubspace::from_span(q_chi, 1e-10);
  CHECK(z.subspace().equals(span, 1e-8));

  // and they are exactly the minimal central projections found by sectors
  auto dec = vna::sector_decompose(cp.algebra, 1e-9);
  for (auto& s : dec.sectors) {
    bool matched = false;
    for (auto& q : q_chi)
      if ((s.central_projection - q).norm() < 1e-9) matched = true;
    CHECK(matched);
  }
}

TEST_CASE("takesaki duality at the block-invariant level") {
  SUBCASE("qubit scenario: both invariants are {(4,1)}") {
    auto report = crossed::takesaki_duality_check(qubit_action(), 1e-9);
    CHECK(report.match);
    CHECK(report.second_crossed.abstract_equal(report.amplified));
    CHECK(report.second_crossed.blocks.size() == 1);
    CHECK(report.second_crossed.blocks[0].first == 4);
  }
  SUBCASE("trivial group: both sides are M itself") {
    FiniteAbelianGroup g({1});
    auto m2 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
    auto report =
        crossed::takesaki_duality_check(GroupAction::trivial(g, m2), 1e-9);
    CHECK(report.match);
    CHECK(report.second_crossed.blocks[0].first == 2);
  }
  SUBCASE("C with trivial Z_3 action: second crossed product is M_3") {
    FiniteAbelianGroup g({3});
    auto c1 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::scalars(1));
    auto report =
        crossed::takesaki_duality_check(GroupAction::trivial(g, c1), 1e-9);
    CHECK(report.match);
    REQUIRE(report.second_crossed.blocks.size() == 1);
    CHECK(report.second_crossed.blocks[0].first == 3);
  }
}

TEST_CASE("theorem 1 split") {
  SUBCASE("qubit scenario passes hypotheses and both parts") {
    auto report =
        crossed::theorem1_split_check(qubit_action(), OperatorAlgebra::diagonal(2), 1e-9);
    CHECK(report.hypotheses_ok);
    CHECK(report.amplification_match);
    CHECK(report.reconstruction_match);
  }
  SUBCASE("trivial action fails the fixed-point hypothesis with a diagnostic") {
    FiniteAbelianGroup g({2});
    auto m2 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
    auto report = crossed::theorem1_split_check(GroupAction::trivial(g, m2),
                                                OperatorAlgebra::diagonal(2), 1e-9);
    CHECK(!report.hypotheses_ok);
    CHECK(report.hypothesis_diagnostic == "not-fixed-point");
  }
}

TEST_CASE("semi-duality") {
  auto action = qubit_action();
  DualGroup dual(action.group());

  SUBCASE("trivial group with v = 1 holds (V' = 1)") {
    FiniteAbelianGroup g({1});
    auto m2 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
    auto triv = GroupAction::trivial(g, m2);
    auto rep = crossed::semi_duality_check(triv, Mat::Identity(2, 2), 1e-9);
    CHECK(rep.witness_valid);
    CHECK(rep.holds);
  }
  SUBCASE("canonical witness for the inner qubit action") {
    auto e = qubit_measure(action, dual);
    Mat v = crossed::semi_duality_witness(action, e);
    CHECK((v * v.adjoint() - Mat::Identity(4, 4)).norm() < 1e-12);
    auto rep = crossed::semi_duality_check(action, v, 1e-9);
    CHECK(rep.witness_valid);
    CHECK(rep.holds);
    CHECK(rep.residual < 1e-12);
  }
  SUBCASE("canonical witness for the inner qutrit action") {
    auto q3 = qutrit_action();
    DualGroup dual3(q3.group());
    auto e3 = kt::spectral_measure(
        OperatorAlgebra::diagonal(3), q3.group(),
        [&](int u) { return q3.implementer(u); }, dual3, 1e-9);
    Mat v = crossed::semi_duality_witness(q3, e3);
    auto rep = crossed::semi_duality_check(q3, v, 1e-9);
    CHECK(rep.witness_valid);
    CHECK(rep.holds);
  }
  SUBCASE("negative control: v = 1 with a nontrivial action fails") {
    auto rep = crossed::semi_duality_check(action, Mat::Identity(4, 4), 1e-9);
    CHECK(rep.witness_valid);
    CHECK(!rep.holds);
    CHECK(rep.residual > 0.5);
  }
}

TEST_CASE("fixed point algebra of the qubit action is the diagonal") {
  auto fixed = crossed::fixed_point_algebra(qubit_action(), 1e-9);
  CHECK(fixed.subspace().equals(OperatorAlgebra::diagonal(2).subspace(), 1e-9));
}

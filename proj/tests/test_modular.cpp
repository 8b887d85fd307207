#include "doctest.h"
#include "takdual/modular.hpp"

#include <cmath>
#include <memory>

using namespace takdual;
using crossed::GroupAction;
using groups::FiniteAbelianGroup;
using modular::StandardForm;
using num::Cplx;
using num::Mat;
using vna::OperatorAlgebra;

namespace {

std::shared_ptr<OperatorAlgebra> m2() {
  return std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(2));
}

Mat rho13() {
  Mat r = Mat::Zero(2, 2);
  r(0, 0) = 1.0 / 3.0;
  r(1, 1) = 2.0 / 3.0;
  return r;
}

Mat sigma_x() {
  Mat m = Mat::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

bool spectrum_matches(const std::vector<double>& spec, std::vector<double> expect,
                      double tol) {
  if (spec.size() != expect.size()) return false;
  std::sort(expect.begin(), expect.end());
  for (size_t i = 0; i < spec.size(); ++i)
    if (std::abs(spec[i] - expect[i]) > tol) return false;
  return true;
}

}  // namespace

TEST_CASE("standard form closed cases") {
  SUBCASE("tracial state on M_2 gives Delta = 1") {
    auto sf = modular::standard_form(m2(), Mat::Identity(2, 2) / 2.0, 1e-9);
    Mat delta = sf.delta_matrix();
    CHECK((delta - Mat::Identity(4, 4)).norm() < 1e-12);
  }
  SUBCASE("rho = diag(1/3, 2/3) has Delta spectrum {1, 1, 1/2, 2}") {
    auto sf = modular::standard_form(m2(), rho13(), 1e-9);
    auto rep = modular::verify_standard_form(sf, 1e-9);
    CHECK(spectrum_matches(rep.delta_spectrum, {1.0, 1.0, 0.5, 2.0}, 1e-10));
  }
  SUBCASE("abelian algebras have trivial modular operator") {
    auto diag = std::make_shared<OperatorAlgebra>(OperatorAlgebra::diagonal(3));
    Mat rho = Mat::Zero(3, 3);
    rho(0, 0) = 0.2;
    rho(1, 1) = 0.3;
    rho(2, 2) = 0.5;
    auto sf = modular::standard_form(diag, rho, 1e-9);
    CHECK((sf.delta_matrix() - Mat::Identity(3, 3)).norm() < 1e-12);
  }
  SUBCASE("non-faithful state is rejected with the offending block") {
    auto blocks = std::make_shared<OperatorAlgebra>(
        OperatorAlgebra::from_blocks({{2, 1}, {1, 1}}));
    Mat rho = Mat::Zero(3, 3);
    rho(0, 0) = 0.5;
    rho(1, 1) = 0.5;  // vanishes on the 1x1 block
    CHECK_THROWS_WITH_AS((void)modular::standard_form(blocks, rho, 1e-9),
                         doctest::Contains("not faithful"), num::PreconditionError);
  }
}

TEST_CASE("standard form invariants on random faithful states") {
  num::Rng rng(101);
  std::vector<std::shared_ptr<OperatorAlgebra>> algebras = {
      m2(), std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(3)),
      std::make_shared<OperatorAlgebra>(OperatorAlgebra::from_blocks({{2, 1}, {1, 1}}))};
  for (auto& alg : algebras) {
    for (int t = 0; t < 5; ++t) {
      Mat rho = rng.density(alg->dim(), 0.05);
      auto sf = modular::standard_form(alg, rho, 1e-9);
      auto rep = modular::verify_standard_form(sf, 1e-9, 7);
      CHECK(rep.s_residual < 1e-10);
      CHECK(rep.delta_sts_residual < 1e-10);
      CHECK(rep.j_squared_residual < 1e-10);
      CHECK(rep.j_cone_residual < 1e-10);
      CHECK(rep.jmj_is_commutant);
      CHECK(rep.sigma_stability_residual < 1e-10);
      CHECK(rep.sigma_group_residual < 1e-11);
      // spectrum symmetry under x -> 1/x
      std::vector<double> inverted;
      for (double v : rep.delta_spectrum) inverted.push_back(1.0 / v);
      CHECK(spectrum_matches(rep.delta_spectrum, inverted, 1e-8));
    }
  }
}

TEST_CASE("KMS condition") {
  SUBCASE("closed M_2 example x = e01, y = e10: both sides are 1/3") {
    auto sf = modular::standard_form(m2(), rho13(), 1e-9);
    Mat x = Mat::Zero(2, 2), y = Mat::Zero(2, 2);
    x(0, 1) = 1.0;
    y(1, 0) = 1.0;
    CHECK(std::abs(sf.phi(x * y) - Cplx(1.0 / 3.0, 0)) < 1e-14);
    CHECK(std::abs(sf.phi(y * sf.sigma_minus_i(x)) - Cplx(1.0 / 3.0, 0)) < 1e-14);
    CHECK(modular::kms_residual(sf, x, y) < 1e-14);
  }
  SUBCASE("x = 1 reduces both sides to phi(y)") {
    auto sf = modular::standard_form(m2(), rho13(), 1e-9);
    num::Rng rng(3);
    Mat y = rng.gaussian_matrix(2, 2);
    CHECK(modular::kms_residual(sf, Mat::Identity(2, 2), y) < 1e-14);
  }
  SUBCASE("random pairs on M_2, M_3 and M_2 + M_1 stay under 1e-9") {
    num::Rng rng(11);
    std::vector<std::shared_ptr<OperatorAlgebra>> algebras = {
        m2(), std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(3)),
        std::make_shared<OperatorAlgebra>(
            OperatorAlgebra::from_blocks({{2, 1}, {1, 1}}))};
    for (auto& alg : algebras) {
      auto sf = modular::standard_form(alg, rng.density(alg->dim(), 0.05), 1e-9);
      for (int t = 0; t < 10; ++t) {
        Mat x = alg->project(rng.gaussian_matrix(alg->dim(), alg->dim()));
        Mat y = alg->project(rng.gaussian_matrix(alg->dim(), alg->dim()));
        CHECK(modular::kms_residual(sf, x, y) < 1e-9);
      }
    }
  }
}

TEST_CASE("relative modular operators") {
  SUBCASE("psi = phi recovers the modular operator") {
    auto sf = modular::standard_form(m2(), rho13(), 1e-9);
    Mat rel = sf.relative_modular(rho13(), 1e-9);
    CHECK((rel - sf.delta_matrix()).norm() < 1e-12);
  }
  SUBCASE("spectrum of Delta_{psi,phi} is the ratio set") {
    auto sf = modular::standard_form(m2(), rho13(), 1e-9);
    Mat rel = sf.relative_modular(Mat::Identity(2, 2) / 2.0, 1e-9);
    num::HermEig e = num::eig_hermitian(rel);
    std::vector<double> values(e.values.data(), e.values.data() + 4);
    CHECK(spectrum_matches(values, {1.5, 1.5, 0.75, 0.75}, 1e-10));
  }
  SUBCASE("abelian case: multiplication by the density ratio") {
    auto diag = std::make_shared<OperatorAlgebra>(OperatorAlgebra::diagonal(2));
    Mat rp = Mat::Zero(2, 2), rq = Mat::Zero(2, 2);
    rp(0, 0) = 0.4;
    rp(1, 1) = 0.6;
    rq(0, 0) = 0.9;
    rq(1, 1) = 0.1;
    auto sf = modular::standard_form(diag, rp, 1e-9);
    Mat rel = sf.relative_modular(rq, 1e-9);
    num::HermEig e = num::eig_hermitian(rel);
    std::vector<double> values(e.values.data(), e.values.data() + 2);
    CHECK(spectrum_matches(values, {0.9 / 0.4, 0.1 / 0.6}, 1e-10));
  }
}

TEST_CASE("Connes cocycles") {
  auto alg = m2();
  num::Rng rng(17);

  SUBCASE("identity cases") {
    Mat one = modular::connes_cocycle(*alg, rho13(), rho13(), 0.7, 1e-9);
    CHECK((one - Mat::Identity(2, 2)).norm() < 1e-12);
    Mat zero_t = modular::connes_cocycle(*alg, rng.density(2, 0.05), rho13(), 0.0, 1e-9);
    CHECK((zero_t - Mat::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("factor case equals the density-power oracle") {
    Mat psi = rng.density(2, 0.05);
    Mat v = modular::connes_cocycle(*alg, psi, rho13(), 0.45, 1e-9);
    Mat oracle = num::herm_imaginary_power(psi, 0.45) *
                 num::herm_imaginary_power(rho13(), -0.45);
    CHECK((v - oracle).norm() < 1e-12);
    CHECK((v * v.adjoint() - Mat::Identity(2, 2)).norm() < 1e-12);
    CHECK(alg->contains(v, 1e-10));
  }
  SUBCASE("cocycle matrix realizes Delta_{psi,phi}^{it} Delta_phi^{-it} on GNS") {
    Mat psi = rng.density(2, 0.05);
    auto sf = modular::standard_form(alg, rho13(), 1e-9);
    const double t = 0.9;
    Mat lhs = num::herm_imaginary_power(sf.relative_modular(psi, 1e-9), t) *
              num::herm_imaginary_power(sf.delta_matrix(), -t);
    Mat v = modular::connes_cocycle(*alg, psi, rho13(), t, 1e-9);
    CHECK((lhs - sf.left_matrix(v)).norm() < 1e-11);
  }
  SUBCASE("chain rule over random faithful triples on M_2 and M_2 + M_1") {
    std::vector<std::shared_ptr<OperatorAlgebra>> algebras = {
        m2(), std::make_shared<OperatorAlgebra>(
                  OperatorAlgebra::from_blocks({{2, 1}, {1, 1}}))};
    for (auto& a : algebras)
      for (int trial = 0; trial < 5; ++trial) {
        Mat r1 = rng.density(a->dim(), 0.05);
        Mat r2 = rng.density(a->dim(), 0.05);
        Mat r3 = rng.density(a->dim(), 0.05);
        for (double t : {0.3, 1.0}) {
          Mat lhs = modular::connes_cocycle(*a, r1, r2, t, 1e-9) *
                    modular::connes_cocycle(*a, r2, r3, t, 1e-9);
          Mat rhs = modular::connes_cocycle(*a, r1, r3, t, 1e-9);
          CHECK((lhs - rhs).norm() < 1e-11);
        }
      }
  }
}

TEST_CASE("dual weight on the Z_2 covariant scenario") {
  FiniteAbelianGroup g({2});
  auto action = GroupAction::from_generator_unitaries(g, m2(), {sigma_x()}, 1e-9);
  const std::vector<double> times{0.3, 1.0, std::sqrt(2.0)};

  SUBCASE("generator formulas hold for rho = diag(1/3, 2/3)") {
    auto rep = modular::dual_weight_check(action, rho13(), times, 1e-9);
    CHECK(rep.generator_residual_algebra < 1e-9);
    CHECK(rep.generator_residual_lambda < 1e-9);
    CHECK(rep.j_squared_residual < 1e-10);
    CHECK(rep.j_commutant_residual < 1e-10);
    CHECK(rep.delta_positivity > 0);
    CHECK(rep.pass);
  }
  SUBCASE("theta-invariant state has a trivial cocycle") {
    Mat inv_rho = Mat::Identity(2, 2) / 2.0;  // sigma_x invariant
    auto rep = modular::dual_weight_check(action, inv_rho, times, 1e-9);
    CHECK(rep.pass);
    // sigma_t^{dual}(lambda(s)) = lambda(s): cocycle (D phi theta : D phi) = 1
    Mat c = modular::connes_cocycle(action.algebra(),
                                    action.apply_inverse(1, inv_rho), inv_rho, 1.0,
                                    1e-9);
    CHECK((c - Mat::Identity(2, 2)).norm() < 1e-12);
  }
  SUBCASE("trivial group reduces to the standard form") {
    FiniteAbelianGroup triv({1});
    auto t_action = GroupAction::trivial(triv, m2());
    auto rep = modular::dual_weight_check(t_action, rho13(), times, 1e-9);
    CHECK(rep.pass);
  }
  SUBCASE("Z_3 with a non-invariant faithful state (s != s^{-1} in J~)") {
    FiniteAbelianGroup g3({3});
    Mat shift = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) shift((i + 1) % 3, i) = 1.0;
    auto m3 = std::make_shared<OperatorAlgebra>(OperatorAlgebra::full(3));
    auto a3 = GroupAction::from_generator_unitaries(g3, m3, {shift}, 1e-9);
    Mat rho = Mat::Zero(3, 3);
    rho(0, 0) = 0.2;
    rho(1, 1) = 0.3;
    rho(2, 2) = 0.5;
    auto rep = modular::dual_weight_check(a3, rho, times, 1e-9);
    CHECK(rep.generator_residual_algebra < 1e-9);
    CHECK(rep.generator_residual_lambda < 1e-9);
    CHECK(rep.j_squared_residual < 1e-9);
    CHECK(rep.j_commutant_residual < 1e-9);
    CHECK(rep.pass);
  }
}

TEST_CASE("left Hilbert algebra structure on the Z_2 covariant scenario") {
  FiniteAbelianGroup g({2});
  auto action = GroupAction::from_generator_unitaries(g, m2(), {sigma_x()}, 1e-9);
  auto rep = modular::left_hilbert_algebra_check(action, rho13(), 1e-9);
  CHECK(rep.homomorphism_residual < 1e-10);
  CHECK(rep.involution_residual < 1e-10);
  CHECK(rep.double_involution_residual < 1e-12);
  CHECK(rep.unit_residual < 1e-13);
  CHECK(rep.bimodule_residual < 1e-10);
  CHECK(rep.pass);

  // also on a block algebra with a permuting action
  auto blocks = std::make_shared<OperatorAlgebra>(
      OperatorAlgebra::from_blocks({{2, 1}, {2, 1}}));
  Mat swap = Mat::Zero(4, 4);
  swap(0, 2) = swap(2, 0) = swap(1, 3) = swap(3, 1) = 1.0;
  auto perm_action = GroupAction::from_generator_unitaries(g, blocks, {swap}, 1e-9);
  num::Rng rng(5);
  Mat rho = rng.density(4, 0.05);
  auto rep2 = modular::left_hilbert_algebra_check(perm_action, rho, 1e-9);
  CHECK(rep2.pass);
  auto rep3 = modular::dual_weight_check(perm_action, rho, {0.3, 1.0}, 1e-9);
  CHECK(rep3.pass);
}

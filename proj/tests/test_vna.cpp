#include "doctest.h"
#include "takdual/vna.hpp"
#include "test_helpers.hpp"

#include <cmath>

using namespace takdual;
using num::Cplx;
using num::Mat;
using vna::OperatorAlgebra;

namespace {

Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST_CASE("commutant closed forms") {
  SUBCASE("of the identity: full matrix algebra") {
    auto c = vna::commutant({Mat::Identity(3, 3)}, 3, 1e-9);
    CHECK(c.linear_dim() == 9);
    auto dec = vna::sector_decompose(c, 1e-9);
    CHECK(dec.invariant().to_string() == "{(3,1)}");
  }
  SUBCASE("of all of M_2: scalars") {
    auto full = OperatorAlgebra::full(2);
    auto c = vna::commutant(full.basis(), 2, 1e-9);
    CHECK(c.linear_dim() == 1);
    CHECK(c.contains(Mat::Identity(2, 2), 1e-9));
  }
  SUBCASE("of diag(1,-1): the diagonal algebra via brute-force oracle") {
    Mat a = diag2(1, -1);
    auto c = vna::commutant({a}, 2, 1e-9);
    CHECK(c.linear_dim() == 2);
    CHECK(c.contains(diag2(1, 0), 1e-9));
    CHECK(c.contains(diag2(0, 1), 1e-9));
    // brute-force 4x4 linear system oracle: X diag = diag X forces X diagonal
    Mat e01 = Mat::Zero(2, 2);
    e01(0, 1) = 1;
    CHECK(!c.contains(e01, 1e-6));
  }
  SUBCASE("dimension mismatch raises") {
    CHECK_THROWS_AS((void)vna::commutant({Mat::Identity(2, 2), Mat::Identity(3, 3)}, 2, 1e-9),
                    num::PreconditionError);
  }
}

TEST_CASE("commutant is unital and star-closed") {
  num::Rng rng(42);
  for (int trial = 0; trial < 4; ++trial) {
    auto c = vna::commutant({testing::random_generator(rng, 4)}, 4, 1e-9);
    CHECK(c.is_unital(1e-8));
    CHECK(c.is_selfadjoint_closed(1e-8));
    CHECK(c.is_product_closed(1e-7));
  }
}

TEST_CASE("generate closed forms") {
  SUBCASE("identity generates scalars") {
    auto a = vna::generate({Mat::Identity(4, 4)}, 4, 1e-9);
    CHECK(a.linear_dim() == 1);
  }
  SUBCASE("e01 generates all of M_2 (word-closure oracle)") {
    Mat e01 = Mat::Zero(2, 2);
    e01(0, 1) = 1;
    auto a = vna::generate({e01}, 2, 1e-9);
    CHECK(a.linear_dim() == 4);
    auto oracle = testing::word_closure_span({e01}, 2, 8);
    CHECK(a.subspace().equals(oracle, 1e-8));
  }
  SUBCASE("regular representation of Z_3 generates a 3-dim abelian algebra") {
    Mat shift = Mat::Zero(3, 3);
    for (int i = 0; i < 3; ++i) shift((i + 1) % 3, i) = 1.0;
    auto a = vna::generate({shift}, 3, 1e-9);
    CHECK(a.linear_dim() == 3);
    CHECK(a.is_abelian(1e-9));
    auto oracle = testing::word_closure_span({shift}, 3, 9);
    CHECK(a.subspace().equals(oracle, 1e-8));
  }
}

TEST_CASE("double commutant idempotence and oracle equivalence on random sets") {
  num::Rng rng(7);
  for (int trial = 0; trial < 12; ++trial) {
    const num::Index d = 2 + static_cast<num::Index>(rng.uniform() * 4);  // 2..5
    const int k = 1 + static_cast<int>(rng.uniform() * 3);
    std::vector<Mat> gens;
    for (int i = 0; i < k; ++i) gens.push_back(testing::random_generator(rng, d));
    auto a = vna::generate(gens, d, 1e-9);
    // idempotence
    auto again = vna::generate(a.basis(), d, 1e-9);
    CHECK(a.subspace().equals(again.subspace(), 1e-8));
    // word-closure oracle
    auto oracle = testing::word_closure_span(gens, d, 2 * static_cast<int>(d * d));
    CHECK(a.subspace().equals(oracle, 1e-8));
    // von Neumann dimension identity
    auto inv = vna::sector_decompose(a, 1e-9).invariant();
    CHECK(inv.linear_dim() == a.linear_dim());
    CHECK(inv.ambient_dim() == static_cast<int>(d));
  }
}

TEST_CASE("center closed forms") {
  SUBCASE("full algebra has scalar center") {
    auto full = OperatorAlgebra::full(3);
    auto z = vna::center(full, 1e-9);
    CHECK(z.linear_dim() == 1);
  }
  SUBCASE("abelian algebra is its own center") {
    auto d = OperatorAlgebra::diagonal(3);
    auto z = vna::center(d, 1e-9);
    CHECK(z.subspace().equals(d.subspace(), 1e-9));
  }
  SUBCASE("M_2 + M_3 block algebra has a 2-dim center") {
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {3, 1}});
    auto z = vna::center(a, 1e-9);
    CHECK(z.linear_dim() == 2);
    Mat z1 = Mat::Zero(5, 5);
    z1.block(0, 0, 2, 2) = Mat::Identity(2, 2);
    CHECK(z.contains(z1, 1e-8));
  }
}

TEST_CASE("sector decomposition") {
  SUBCASE("full M_d is one sector") {
    auto dec = vna::sector_decompose(OperatorAlgebra::full(4), 1e-9);
    CHECK(dec.invariant().to_string() == "{(4,1)}");
  }
  SUBCASE("diagonal in d=3: three scalar sectors") {
    auto dec = vna::sector_decompose(OperatorAlgebra::diagonal(3), 1e-9);
    CHECK(dec.invariant().to_string() == "{(1,1),(1,1),(1,1)}");
  }
  SUBCASE("M_2 + M_2 on C^4") {
    auto dec = vna::sector_decompose(OperatorAlgebra::from_blocks({{2, 1}, {2, 1}}), 1e-9);
    CHECK(dec.invariant().to_string() == "{(2,1),(2,1)}");
    // projections sum to identity and are orthogonal
    Mat sum = Mat::Zero(4, 4);
    for (auto& s : dec.sectors) sum += s.central_projection;
    CHECK((sum - Mat::Identity(4, 4)).norm() < 1e-10);
  }
  SUBCASE("multiplicity is detected: M_2 with multiplicity 2") {
    auto dec = vna::sector_decompose(OperatorAlgebra::from_blocks({{2, 2}}), 1e-9);
    CHECK(dec.invariant().to_string() == "{(2,2)}");
  }
  SUBCASE("sector order is deterministic across seeds") {
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {1, 2}, {3, 1}});
    auto d1 = vna::sector_decompose(a, 1e-9, 0);
    auto d2 = vna::sector_decompose(a, 1e-9, 12345);
    REQUIRE(d1.sectors.size() == d2.sectors.size());
    for (size_t i = 0; i < d1.sectors.size(); ++i)
      CHECK((d1.sectors[i].central_projection - d2.sectors[i].central_projection).norm() <
            1e-9);
  }
}

TEST_CASE("is_masa") {
  auto m2 = OperatorAlgebra::full(2);
  SUBCASE("diagonal in M_2 is maximal abelian") {
    CHECK(vna::is_masa(OperatorAlgebra::diagonal(2), m2, 1e-9));
  }
  SUBCASE("scalars in M_2 are not") {
    CHECK(!vna::is_masa(OperatorAlgebra::scalars(2), m2, 1e-9));
  }
  SUBCASE("abelian ambient: A is a MASA of itself") {
    auto d3 = OperatorAlgebra::diagonal(3);
    CHECK(vna::is_masa(d3, d3, 1e-9));
  }
  SUBCASE("containment violation raises") {
    CHECK_THROWS_AS((void)vna::is_masa(OperatorAlgebra::full(3),
                                       OperatorAlgebra::diagonal(3), 1e-9),
                    num::PreconditionError);
  }
}

TEST_CASE("qc channel") {
  SUBCASE("factor gives the point distribution") {
    auto mu = vna::qc_channel(vna::StateOnAlgebra::tracial(3), OperatorAlgebra::full(3), 1e-9);
    REQUIRE(mu.size() == 1);
    CHECK(mu[0] == doctest::Approx(1.0));
  }
  SUBCASE("tracial state on M_2 + M_2 gives (1/2, 1/2)") {
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {2, 1}});
    auto mu = vna::qc_channel(vna::StateOnAlgebra::tracial(4), a, 1e-9);
    REQUIRE(mu.size() == 2);
    CHECK(mu[0] == doctest::Approx(0.5));
    CHECK(mu[1] == doctest::Approx(0.5));
  }
  SUBCASE("state supported in one sector") {
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {2, 1}});
    auto dec = vna::sector_decompose(a, 1e-9);
    Mat rho = Mat::Zero(4, 4);
    rho(0, 0) = 0.25;
    rho(1, 1) = 0.75;  // inside the first block
    auto state = vna::StateOnAlgebra::from_density(rho, 1e-9);
    auto mu = vna::qc_channel(state, a, 1e-9);
    // support condition: all weight on the sector containing e00
    double on_support = 0;
    for (size_t k = 0; k < mu.size(); ++k) {
      Cplx inside = (dec.sectors[k].central_projection * rho).trace();
      if (std::abs(inside.real() - 1.0) < 1e-9) on_support = mu[k];
    }
    CHECK(on_support == doctest::Approx(1.0));
  }
  SUBCASE("probability vector on random states for every constructed algebra") {
    num::Rng rng(19);
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {1, 1}, {1, 2}});
    for (int t = 0; t < 6; ++t) {
      auto mu = vna::qc_channel(
          vna::StateOnAlgebra::from_density(rng.density(a.dim()), 1e-9), a, 1e-9);
      double total = 0;
      for (double p : mu) {
        CHECK(p >= -1e-10);
        total += p;
      }
      CHECK(total == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("central support") {
  SUBCASE("identity projection") {
    auto a = OperatorAlgebra::full(3);
    Mat z = vna::central_support(Mat::Identity(3, 3), a, 1e-9);
    CHECK((z - Mat::Identity(3, 3)).norm() < 1e-10);
  }
  SUBCASE("rank-one projection inside the first block of M_2 + M_2") {
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {2, 1}});
    Mat p = Mat::Zero(4, 4);
    p(0, 0) = 1.0;
    Mat z = vna::central_support(p, a, 1e-9);
    Mat expected = Mat::Zero(4, 4);
    expected.block(0, 0, 2, 2) = Mat::Identity(2, 2);
    CHECK((z - expected).norm() < 1e-9);
  }
  SUBCASE("scalars: any nonzero projection has full support") {
    auto a = OperatorAlgebra::scalars(2);
    Mat p = Mat::Zero(2, 2);
    p(1, 1) = 1.0;
    Mat z = vna::central_support(p, a, 1e-9);
    CHECK((z - Mat::Identity(2, 2)).norm() < 1e-10);
  }
  SUBCASE("projection neither in A nor in A' raises") {
    auto a = OperatorAlgebra::from_blocks({{2, 1}, {2, 1}});
    num::CVec v = num::CVec::Zero(4);
    v[0] = v[2] = 1.0 / std::sqrt(2.0);  // crosses the two blocks
    Mat p = v * v.adjoint();
    CHECK_THROWS_AS((void)vna::central_support(p, a, 1e-9), num::PreconditionError);
    Mat notproj = Mat::Identity(4, 4) * 0.5;
    CHECK_THROWS_AS((void)vna::central_support(notproj, a, 1e-9), num::PreconditionError);
  }
}

TEST_CASE("quasi-equivalence via central supports") {
  // two rank-one projections inside the same block share a central support;
  // one in the other block does not
  auto a = OperatorAlgebra::from_blocks({{2, 1}, {2, 1}});
  Mat p1 = Mat::Zero(4, 4), p2 = Mat::Zero(4, 4), q = Mat::Zero(4, 4);
  p1(0, 0) = 1.0;
  p2(1, 1) = 1.0;
  q(2, 2) = 1.0;
  Mat z1 = vna::central_support(p1, a, 1e-9);
  Mat z2 = vna::central_support(p2, a, 1e-9);
  Mat zq = vna::central_support(q, a, 1e-9);
  CHECK((z1 - z2).norm() < 1e-9);
  CHECK((z1 - zq).norm() > 0.5);
}

#include "doctest.h"
#include "takdual/groups.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace takdual;
using groups::Character;
using groups::DualGroup;
using groups::FiniteAbelianGroup;
using num::Cplx;
using num::Mat;

TEST_CASE("element arithmetic on Z_2 x Z_3") {
  FiniteAbelianGroup g({2, 3});
  CHECK(g.order() == 6);
  int a = g.index({1, 2});
  int b = g.index({1, 1});
  CHECK(g.compose(a, b) == g.index({0, 0}));
  CHECK(g.inverse(a) == g.index({1, 1}));
  CHECK(g.compose(a, g.inverse(a)) == g.identity());
  CHECK(g.tuple(g.index({1, 2})) == std::vector<int>{1, 2});
}

TEST_CASE("fourier transform matches the small closed forms") {
  SUBCASE("trivial group") {
    FiniteAbelianGroup g({1});
    Mat f = groups::fourier_transform(g);
    CHECK(f.rows() == 1);
    CHECK(std::abs(f(0, 0) - Cplx(1, 0)) < 1e-15);
  }
  SUBCASE("Z_2") {
    FiniteAbelianGroup g({2});
    Mat f = groups::fourier_transform(g);
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(f(0, 0) - Cplx(r, 0)) < 1e-14);
    CHECK(std::abs(f(0, 1) - Cplx(r, 0)) < 1e-14);
    CHECK(std::abs(f(1, 0) - Cplx(r, 0)) < 1e-14);
    CHECK(std::abs(f(1, 1) - Cplx(-r, 0)) < 1e-14);
  }
  SUBCASE("Z_3 entries are conjugated roots of unity over sqrt(3)") {
    FiniteAbelianGroup g({3});
    Mat f = groups::fourier_transform(g);
    const double r = 1.0 / std::sqrt(3.0);
    const Cplx omega = std::exp(Cplx(0, 2.0 * std::numbers::pi / 3.0));
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        CHECK(std::abs(f(j, k) - r * std::pow(std::conj(omega), j * k)) < 1e-13);
  }
}

TEST_CASE("fourier transform is unitary for groups up to order 12") {
  const std::vector<std::vector<int>> shapes = {{1}, {2}, {3}, {4},    {5},    {6},
                                                {7}, {8}, {12}, {2, 2}, {2, 4}, {3, 4}};
  for (const auto& s : shapes) {
    FiniteAbelianGroup g(s);
    Mat f = groups::fourier_transform(g);
    CHECK((f * f.adjoint() - Mat::Identity(g.order(), g.order())).norm() < 1e-12);
  }
}

TEST_CASE("characters multiply and are orthogonal for all groups up to order 12") {
  const std::vector<std::vector<int>> shapes = {{2},    {3},    {4},    {5},  {6},
                                                {7},    {8},    {9},    {10}, {11},
                                                {12},   {2, 2}, {2, 3}, {2, 4},
                                                {3, 3}, {2, 2, 2}, {2, 2, 3}};
  for (const auto& shape : shapes) {
    FiniteAbelianGroup g(shape);
    if (g.order() > 12) continue;
    DualGroup dual(g);
    for (int c = 0; c < dual.size(); ++c) {
      Character chi = dual.character(c);
      CHECK(std::abs(chi(g.identity()) - Cplx(1, 0)) < 1e-15);
      for (int u = 0; u < g.order(); ++u)
        for (int v = 0; v < g.order(); ++v)
          CHECK(std::abs(chi(g.compose(u, v)) - chi(u) * chi(v)) < 1e-13);
    }
    // orthogonality: (1/|U|) sum_u gamma(u) conj(gamma'(u)) = delta
    for (int c1 = 0; c1 < dual.size(); ++c1)
      for (int c2 = 0; c2 < dual.size(); ++c2) {
        Character x1 = dual.character(c1), x2 = dual.character(c2);
        Cplx mean = groups::invariant_mean(
            g, [&](int u) { return x1(u) * std::conj(x2(u)); });
        CHECK(std::abs(mean - (c1 == c2 ? Cplx(1, 0) : Cplx(0, 0))) < 1e-13);
      }
  }
}

TEST_CASE("invariant mean basics") {
  FiniteAbelianGroup g({5});
  CHECK(std::abs(groups::invariant_mean(g, [](int) { return Cplx(1, 0); }) -
                 Cplx(1, 0)) < 1e-15);
  DualGroup dual(g);
  Character iota = dual.character(dual.iota());
  CHECK(std::abs(groups::invariant_mean(g, [&](int u) { return iota(u); }) -
                 Cplx(1, 0)) < 1e-15);
  Character chi = dual.character(2);
  CHECK(std::abs(groups::invariant_mean(g, [&](int u) { return chi(u); })) < 1e-14);
  // translation invariance
  for (int a = 0; a < g.order(); ++a) {
    Cplx m1 = groups::invariant_mean(g, [&](int u) { return chi(u) + 0.5; });
    Cplx m2 = groups::invariant_mean(
        g, [&](int u) { return chi(g.compose(a, u)) + 0.5; });
    CHECK(std::abs(m1 - m2) < 1e-13);
  }
}

TEST_CASE("double dual map is a group isomorphism by enumeration") {
  const std::vector<std::vector<int>> shapes = {{2}, {3}, {6}, {2, 2}, {2, 3}, {12}};
  for (const auto& s : shapes) {
    FiniteAbelianGroup g(s);
    DualGroup dual(g);
    DualGroup ddual(dual.as_group());
    // u -> (gamma -> gamma(u)) lands on a character of the dual; collect.
    std::vector<int> image;
    for (int u = 0; u < g.order(); ++u) {
      int hit = ddual.find_character(
          [&](int c) { return dual.character(c)(u); }, 1e-9);
      REQUIRE(hit >= 0);
      image.push_back(hit);
    }
    // injective (hence bijective) and a homomorphism
    std::set<int> distinct(image.begin(), image.end());
    CHECK(static_cast<int>(distinct.size()) == g.order());
    for (int u = 0; u < g.order(); ++u)
      for (int v = 0; v < g.order(); ++v)
        CHECK(image[static_cast<size_t>(g.compose(u, v))] ==
              ddual.as_group().compose(image[static_cast<size_t>(u)],
                                       image[static_cast<size_t>(v)]));
  }
}

TEST_CASE("regular representation is a homomorphism") {
  FiniteAbelianGroup g({2, 3});
  for (int a = 0; a < g.order(); ++a)
    for (int b = 0; b < g.order(); ++b)
      CHECK((g.left_translation(a) * g.left_translation(b) -
             g.left_translation(g.compose(a, b)))
                .norm() < 1e-14);
}

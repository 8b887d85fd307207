#include "doctest.h"
#include "takdual/num.hpp"

using namespace takdual;
using num::Cplx;
using num::Mat;

TEST_CASE("kron matches tensor index convention") {
  Mat a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 0, 1, 1, 0;
  Mat k = num::kron(a, b);
  CHECK(k.rows() == 4);
  CHECK(k(0, 1) == Cplx(1, 0));  // a(0,0) * b(0,1)
  CHECK(k(2, 3) == Cplx(4, 0));  // a(1,1) * b(0,1)
  CHECK(k(1, 0) == Cplx(1, 0));  // a(0,0) * b(1,0)
}

TEST_CASE("hermitian eigendecomposition reconstructs") {
  num::Rng rng(7);
  Mat h = rng.hermitian(24);
  num::HermEig e = num::eig_hermitian(h);
  Mat recon = e.vectors * e.values.cast<Cplx>().asDiagonal() * e.vectors.adjoint();
  CHECK((recon - h).norm() < 1e-11 * h.norm());
  CHECK((e.vectors.adjoint() * e.vectors - Mat::Identity(24, 24)).norm() < 1e-12);
}

TEST_CASE("nullspace finds exact kernels and nothing else") {
  // c = diag(0, 0, 1, 2) has a two-dimensional kernel.
  Mat c = Mat::Zero(4, 4);
  c(2, 2) = 1;
  c(3, 3) = 2;
  Mat ns = num::nullspace(c, 1e-9);
  CHECK(ns.cols() == 2);
  CHECK((c * ns).norm() < 1e-12);

  Mat full = Mat::Identity(3, 3);
  CHECK(num::nullspace(full, 1e-9).cols() == 0);
}

TEST_CASE("nullspace raises ambiguity inside the tolerance band") {
  Mat c = Mat::Zero(3, 3);
  c(0, 0) = 1.0;
  c(1, 1) = 3e-9;  // hugs the 1e-9 relative threshold from above
  CHECK_THROWS_AS((void)num::nullspace(c, 1e-9), num::AmbiguityError);
}

TEST_CASE("subspace intersection of matrix spans") {
  // span{E00, E01} cap span{E00, E10} = span{E00}
  Mat e00 = Mat::Zero(2, 2), e01 = Mat::Zero(2, 2), e10 = Mat::Zero(2, 2);
  e00(0, 0) = 1;
  e01(0, 1) = 1;
  e10(1, 0) = 1;
  auto s1 = num::MatSubspace::from_span({e00, e01}, 1e-9);
  auto s2 = num::MatSubspace::from_span({e00, e10}, 1e-9);
  auto inter = s1.intersect(s2, 1e-9);
  CHECK(inter.dim() == 1);
  CHECK(inter.contains(e00, 1e-10));
  CHECK(!inter.contains(e01, 1e-10));
}

TEST_CASE("herm_imaginary_power is unitary with group law") {
  num::Rng rng(3);
  Mat g = rng.gaussian_matrix(6, 6);
  Mat h = g * g.adjoint() + Mat::Identity(6, 6);
  Mat u1 = num::herm_imaginary_power(h, 0.7);
  Mat u2 = num::herm_imaginary_power(h, 0.3);
  Mat u3 = num::herm_imaginary_power(h, 1.0);
  CHECK((u1 * u1.adjoint() - Mat::Identity(6, 6)).norm() < 1e-12);
  CHECK((u1 * u2 - u3).norm() < 1e-12);
}

TEST_CASE("partial trace and flip") {
  num::Rng rng(5);
  Mat a = rng.gaussian_matrix(3, 3);
  Mat b = rng.gaussian_matrix(2, 2);
  Mat pt = num::partial_trace_second(num::kron(a, b), 3, 2);
  CHECK((pt - b.trace() * a).norm() < 1e-12);

  Mat sigma = num::flip_operator(3, 2);
  CHECK((sigma * num::kron(a, b) * sigma.adjoint() - num::kron(b, a)).norm() < 1e-12);
}

TEST_CASE("embed_two_slots places operators correctly") {
  num::Rng rng(11);
  Mat v = rng.gaussian_matrix(4, 4);  // on 2 x 2
  std::array<num::Index, 3> dims{2, 3, 2};
  Mat v13 = num::embed_two_slots(v, dims, 0, 2);
  // compare against flip-based construction: (1 x s)(v x 1)(1 x s)
  Mat s23 = num::kron(Mat::Identity(2, 2), num::flip_operator(3, 2));
  Mat direct = s23.adjoint() * num::kron(v, Mat::Identity(3, 3)) * s23;
  CHECK((v13 - direct).norm() < 1e-12);
}

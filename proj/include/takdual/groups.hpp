#pragma once

// Finite abelian groups Z_{n1} x ... x Z_{nk}, their Pontryagin duals,
// characters, the invariant mean, and the unitary Fourier transform between
// l^2(U) and l^2(U^).

#include "takdual/num.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace takdual::groups {

using num::Cplx;
using num::Mat;

// Elements are exponent tuples addressed by a lexicographic index; the
// identity sits at index 0. Composition is componentwise addition mod n_j.
class FiniteAbelianGroup {
 public:
  explicit FiniteAbelianGroup(std::vector<int> orders);

  int order() const { return order_; }
  const std::vector<int>& orders() const { return orders_; }
  int rank() const { return static_cast<int>(orders_.size()); }

  std::vector<int> tuple(int index) const;
  int index(const std::vector<int>& tuple) const;

  int compose(int a, int b) const;
  int inverse(int a) const;
  int identity() const { return 0; }

  // Generator of the j-th cyclic factor.
  int factor_generator(int j) const;

  // Regular representation lambda_a |b> = |ab> on l^2(U).
  Mat left_translation(int a) const;

 private:
  std::vector<int> orders_;
  int order_;
};

// gamma_a(u) = exp(2 pi i sum_j a_j u_j / n_j)
class Character {
 public:
  Character(const FiniteAbelianGroup* group, int dual_index);

  Cplx operator()(int element_index) const;
  int dual_index() const { return dual_index_; }
  bool is_identity() const { return dual_index_ == 0; }

 private:
  const FiniteAbelianGroup* group_;
  int dual_index_;
  std::vector<int> exponents_;
};

// The dual group with characters in the canonical lexicographic enumeration;
// the identity character iota is at index 0. As an abstract group the dual is
// a copy of the host (same orders, same index arithmetic).
class DualGroup {
 public:
  explicit DualGroup(const FiniteAbelianGroup& group);

  const FiniteAbelianGroup& host() const { return *host_; }
  const FiniteAbelianGroup& as_group() const { return index_group_; }
  int size() const { return index_group_.order(); }

  Character character(int dual_index) const { return Character(host_, dual_index); }
  int iota() const { return 0; }

  int compose(int a, int b) const { return index_group_.compose(a, b); }
  int inverse(int a) const { return index_group_.inverse(a); }

  // lambda_gamma |gamma'> = |gamma gamma'> on l^2(U^).
  Mat left_translation(int dual_index) const { return index_group_.left_translation(dual_index); }

  // Finds the character matching the given values on all group elements;
  // returns -1 when none matches within tol.
  int find_character(const std::function<Cplx(int)>& values, double tol) const;

 private:
  const FiniteAbelianGroup* host_;
  FiniteAbelianGroup index_group_;
};

// F[gamma, u] = conj(gamma(u)) / sqrt(|U|), unitary from l^2(U) to l^2(U^).
Mat fourier_transform(const FiniteAbelianGroup& group);

Cplx invariant_mean(const FiniteAbelianGroup& group, const std::function<Cplx(int)>& f);

}  // namespace takdual::groups

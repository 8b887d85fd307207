#pragma once

// Crossed products M x|_alpha U by finite abelian groups: covariant
// embeddings, the convolution algebra with its operator-valued Fourier
// transform, the dual action of U^, Takesaki duality and the split of it
// into amplification and reconstruction, plus the semi-duality condition.

#include "takdual/groups.hpp"
#include "takdual/kt.hpp"
#include "takdual/num.hpp"
#include "takdual/vna.hpp"

#include <memory>
#include <string>
#include <vector>

namespace takdual::crossed {

using groups::DualGroup;
using groups::FiniteAbelianGroup;
using num::Index;
using num::Mat;
using vna::BlockInvariant;
using vna::OperatorAlgebra;

// A per-element automorphism family of an operator algebra, carried by
// implementing unitaries on the ambient space. `inner` records whether the
// implementers live inside the algebra itself.
class GroupAction {
 public:
  GroupAction() = default;
  // Implementers for each group element, in enumeration order.
  static GroupAction from_unitaries(FiniteAbelianGroup group,
                                    std::shared_ptr<const OperatorAlgebra> algebra,
                                    std::vector<Mat> implementers, double tol);
  // Implementers for each cyclic factor generator; the rest by products.
  static GroupAction from_generator_unitaries(FiniteAbelianGroup group,
                                              std::shared_ptr<const OperatorAlgebra> algebra,
                                              const std::vector<Mat>& generator_unitaries,
                                              double tol);
  static GroupAction trivial(FiniteAbelianGroup group,
                             std::shared_ptr<const OperatorAlgebra> algebra);

  const FiniteAbelianGroup& group() const { return group_; }
  const OperatorAlgebra& algebra() const { return *algebra_; }
  std::shared_ptr<const OperatorAlgebra> algebra_ptr() const { return algebra_; }
  const Mat& implementer(int u) const { return implementers_[static_cast<size_t>(u)]; }
  bool inner() const { return inner_; }

  Mat apply(int u, const Mat& x) const;
  Mat apply_inverse(int u, const Mat& x) const;

 private:
  FiniteAbelianGroup group_{std::vector<int>{1}};
  std::shared_ptr<const OperatorAlgebra> algebra_;
  std::vector<Mat> implementers_;
  bool inner_ = false;
};

// pi_alpha(X) = sum_u alpha_u^{-1}(X) (x) e_uu on H (x) l^2(U).
Mat covariant_embedding(const GroupAction& action, const Mat& x);
// 1 (x) lambda_u.
Mat lambda_embedding(const GroupAction& action, int u);

struct CrossedProduct {
  GroupAction action;
  Index base_dim = 0;
  Index ambient = 0;
  OperatorAlgebra algebra;        // generated on H (x) l^2(U)
  OperatorAlgebra commutant;      // kept from the double-commutant pass
  BlockInvariant invariant;
  double covariance_residual = 0.0;

  Mat pi(const Mat& x) const { return covariant_embedding(action, x); }
  Mat lambda(int u) const { return lambda_embedding(action, u); }
};

CrossedProduct crossed_product(const GroupAction& action, double tol,
                               std::uint64_t seed = 0);

// Functions U -> M with the convolution product and involution of the
// crossed-product presentation.
using MFunction = std::vector<Mat>;

MFunction convolution_product(const MFunction& x, const MFunction& y,
                              const GroupAction& action);
MFunction involution(const MFunction& x, const GroupAction& action);
MFunction delta_unit(const GroupAction& action);

// F(X) = sum_u pi_alpha(X(u)) (1 (x) lambda_u).
Mat op_fourier(const MFunction& x, const GroupAction& action);

// Dual action of U^ on the crossed product: alpha^_gamma = Ad(1 (x) m_gamma)
// with m_gamma the pointer multiplication by gamma.
GroupAction dual_action(const CrossedProduct& c, const DualGroup& dual, double tol);

// || pi_alpha^(Y) - sum_gamma alpha^_gamma(Y) (x) q_gamma || maximised over
// the crossed-product generators, where pi_alpha^ = Ad(1 (x) sW*s)(Y (x) 1)
// and q_gamma are the spectral projections of the regular representation.
double dual_coaction_residual(const CrossedProduct& c, const DualGroup& dual);

struct DualityReport {
  BlockInvariant second_crossed;
  BlockInvariant amplified;        // M (x) B(l^2(U))
  bool match = false;
  std::string note;
};

DualityReport takesaki_duality_check(const GroupAction& action, double tol,
                                     std::uint64_t seed = 0);

struct Theorem1Report {
  bool masa_ok = false;
  bool fixed_point_ok = false;
  bool generating_ok = false;
  bool hypotheses_ok = false;
  std::string hypothesis_diagnostic;
  BlockInvariant crossed_inv;
  BlockInvariant amplification_side;   // A (x) B(l^2(U))
  bool amplification_match = false;    // part (i)
  BlockInvariant second_crossed_inv;
  BlockInvariant reconstruction_side;  // M (x) B(l^2(U))
  bool reconstruction_match = false;   // part (ii)
};

Theorem1Report theorem1_split_check(const GroupAction& action,
                                    const OperatorAlgebra& masa, double tol,
                                    std::uint64_t seed = 0);

struct SemiDualityReport {
  bool holds = false;
  double residual = 0.0;
  bool witness_valid = false;     // unitary and inside M (x) lambda(U)''
  std::string note;
};

// alpha-bar(v) = (v (x) 1)(1 (x) V') on H (x) l^2(U) (x) l^2(U).
SemiDualityReport semi_duality_check(const GroupAction& action, const Mat& witness,
                                     double tol);

// Canonical witness for an inner action whose spectral measure is atomic of
// rank one and bijective onto the dual: v = sum_u alpha_u^{-1}(q) (x) lambda_u
// with q the projection onto the uniform superposition of atom vectors.
Mat semi_duality_witness(const GroupAction& action, const kt::SpectralMeasure& e);

// Fixed-point subalgebra M^{alpha(U)}.
OperatorAlgebra fixed_point_algebra(const GroupAction& action, double tol);

// M (x) B(l^2(U)) generated on H (x) l^2(U); used as the comparison side of
// the duality statements.
OperatorAlgebra amplification(const OperatorAlgebra& m,
                              const FiniteAbelianGroup& group, double tol,
                              std::uint64_t seed = 0);

}  // namespace takdual::crossed

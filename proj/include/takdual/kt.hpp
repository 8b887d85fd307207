#pragma once

// Kac-Takesaki operators V, V', W on group and dual-group l^2 spaces,
// spectral measures of MASAs under an embedded unitary group, and the
// couplings E*(V) and EW that implement the measurement interaction.

#include "takdual/groups.hpp"
#include "takdual/num.hpp"
#include "takdual/vna.hpp"

#include <functional>
#include <vector>

namespace takdual::kt {

using groups::DualGroup;
using groups::FiniteAbelianGroup;
using num::Index;
using num::Mat;

enum class KTVariant { V, VPrime, W };

struct KTOperator {
  Mat matrix;       // unitary on l^2(G) (x) l^2(G)
  Index group_order = 0;
  KTVariant variant = KTVariant::V;
};

// |s,t> -> |s, st> on l^2(U^) (x) l^2(U^).
KTOperator build_V(const DualGroup& dual);

// |s,t> -> |t^{-1} s, t> on l^2(U) (x) l^2(U); Fourier conjugate of V.
KTOperator build_W(const FiniteAbelianGroup& group);

// |s,t> -> |s t^{-1}, t>; enters the semi-duality condition.
KTOperator build_V_prime(const FiniteAbelianGroup& group);

// || X12 X13 X23 - X23 X12 || for X on l^2(G) (x) l^2(G).
double pentagon_residual(const Mat& x, Index n);

// || C12 C13 V23 - V23 C12 || for a coupling C on H (x) l^2(G) and a K-T
// operator V on l^2(G) (x) l^2(G).
double modified_pentagon_residual(const Mat& coupling, Index dim_h, Index n,
                                  const Mat& v);

// || V (lambda (x) 1) - (lambda (x) lambda) V || maximised over group elements.
double intertwining_residual_V(const KTOperator& v, const DualGroup& dual);
// || W (lambda_u (x) lambda_u) - (1 (x) lambda_u) W || maximised over u.
double intertwining_residual_W(const KTOperator& w, const FiniteAbelianGroup& group);

// || W - (F (x) F)^{-1} V (F (x) F) ||.
double fourier_conjugacy_residual(const KTOperator& w, const KTOperator& v,
                                  const FiniteAbelianGroup& group);

struct SpectralAtom {
  Mat projection;   // minimal projection of A
  int character;    // dual index of the induced character
};

// Simultaneous diagonalisation of a MASA A with the characters induced by an
// embedded unitary representation of U inside A.
struct SpectralMeasure {
  Index dim = 0;                 // ambient Hilbert space dimension
  std::vector<SpectralAtom> atoms;
  bool injective = false;        // atom -> character injective, i.e. U'' = A

  // E(chi): sum of atom projections carrying the character (zero if absent).
  Mat projection_for(int character) const;
  // Embedded unitary E(u) = sum_chi chi(u) E(chi).
  Mat embedded_unitary(const DualGroup& dual, int u) const;
};

SpectralMeasure spectral_measure(const vna::OperatorAlgebra& a,
                                 const FiniteAbelianGroup& group,
                                 const std::function<Mat(int)>& embed,
                                 const DualGroup& dual, double tol,
                                 std::uint64_t seed = 0);

// E*(V) = sum_chi E(chi) (x) l_chi on H (x) l^2(U^), l_chi |gamma> = |chi gamma>.
Mat coupling_estar_v(const SpectralMeasure& e, const DualGroup& dual);

// EW = sum_u E(u)^dagger (x) e_uu on H (x) l^2(U).
Mat coupling_ew(const SpectralMeasure& e, const FiniteAbelianGroup& group,
                const DualGroup& dual);

}  // namespace takdual::kt

#pragma once

// Finite-dimensional Tomita-Takesaki machinery: GNS standard forms, modular
// operator and conjugation, modular automorphisms, relative modular
// operators, Connes cocycles, and the dual-weight formulas on crossed
// products.

#include "takdual/crossed.hpp"
#include "takdual/num.hpp"
#include "takdual/vna.hpp"

#include <memory>
#include <vector>

namespace takdual::modular {

using num::CVec;
using num::Index;
using num::Mat;
using vna::OperatorAlgebra;

// GNS representation of (M, phi) for a faithful positive functional given by
// an ambient density; all modular objects are carried both at the element
// level (via the projected density inside M) and as matrices on the GNS
// space. Antilinear maps are stored as the matrix C of their linear part,
// acting as c -> C conj(c).
class StandardForm {
 public:
  static StandardForm build(std::shared_ptr<const OperatorAlgebra> m, const Mat& rho,
                            double tol);

  const OperatorAlgebra& algebra() const { return *m_; }
  Index gns_dim() const { return static_cast<Index>(gns_basis_.size()); }
  const Mat& density() const { return rho_m_; }  // E_M density, invertible

  num::Cplx phi(const Mat& x) const { return (rho_m_ * x).trace(); }

  CVec coords(const Mat& x) const;
  Mat element(const CVec& c) const;
  CVec omega() const;  // coordinates of 1

  Mat left_matrix(const Mat& x) const;

  Mat delta_matrix() const;                   // Hermitian, positive
  Mat delta_imaginary_power(double t) const;  // Delta^{it}
  Mat s_antilinear() const;                   // x Omega -> x^dagger Omega
  Mat j_antilinear() const;                   // S Delta^{-1/2}

  // GNS(phi) matrix of Delta_{psi,phi} : x -> rho_psi x rho_phi^{-1}, both
  // densities taken at their own scale.
  Mat relative_modular(const Mat& rho_psi, double tol) const;

  // Element-level modular calculus.
  Mat sigma(const Mat& x, double t) const;     // rho^{it} x rho^{-it}
  Mat sigma_minus_i(const Mat& x) const;       // rho x rho^{-1}

  // Standard implementation of an automorphism given by its element map and
  // the transported density of phi compose theta^{-1}.
  Mat covariant_implementer(const std::function<Mat(const Mat&)>& theta) const;

 private:
  std::shared_ptr<const OperatorAlgebra> m_;
  Mat rho_m_;                     // projected density inside M
  Mat rho_sqrt_, rho_inv_sqrt_, rho_inv_;
  std::vector<Mat> gns_basis_;    // phi-orthonormal elements of M
};

StandardForm standard_form(std::shared_ptr<const OperatorAlgebra> m, const Mat& rho,
                           double tol);

struct StandardFormReport {
  double s_residual = 0;           // S(x Omega) = x^dagger Omega
  double delta_sts_residual = 0;   // <Sx, Sy> = <y, Delta x>
  double j_squared_residual = 0;   // J^2 = 1
  double j_cone_residual = 0;      // J Delta^{1/2} x Omega = x^dagger Omega check
  bool jmj_is_commutant = false;   // J M J = M' exactly as subspaces
  double sigma_stability_residual = 0;  // sigma_t(M) stays in M
  double sigma_group_residual = 0;      // sigma_{t+s} = sigma_t sigma_s
  std::vector<double> delta_spectrum;
};

StandardFormReport verify_standard_form(const StandardForm& sf, double tol,
                                        std::uint64_t seed = 0);

// |phi(x y) - phi(y sigma_{-i}(x))|.
double kms_residual(const StandardForm& sf, const Mat& x, const Mat& y);

// GNS(phi) matrix of Delta_{psi,phi} : x -> rho_psi x rho_phi^{-1}.
Mat relative_modular_matrix(const OperatorAlgebra& m, const Mat& rho_psi,
                            const Mat& rho_phi, double tol);

// (D psi : D phi)_t = rho_psi^{it} rho_phi^{-it} as an element of M.
Mat connes_cocycle(const OperatorAlgebra& m, const Mat& rho_psi, const Mat& rho_phi,
                   double t, double tol);

struct DualWeightReport {
  std::vector<double> times;
  double generator_residual_algebra = 0;  // sigma^hat on pi_theta(N)
  double generator_residual_lambda = 0;   // sigma^hat on lambda(s)
  double j_squared_residual = 0;
  double j_commutant_residual = 0;        // J~ M~ J~ commutes with M~
  double delta_positivity = 0;            // min eigenvalue of Delta~
  bool pass = false;
};

// Builds Delta~ and J~ for the dual weight of phi on N x|_theta G from the
// relative modular data of phi and verifies the generator formulas.
DualWeightReport dual_weight_check(const crossed::GroupAction& theta, const Mat& rho,
                                   const std::vector<double>& times, double tol,
                                   std::uint64_t seed = 0);

struct LeftHilbertReport {
  double homomorphism_residual = 0;   // pi~(X * Y) = pi~(X) pi~(Y)
  double involution_residual = 0;     // pi~(X^#) = pi~(X)^dagger
  double double_involution_residual = 0;  // X^## = X
  double unit_residual = 0;           // delta_e * X = X = X * delta_e
  double bimodule_residual = 0;       // compatibility relations
  bool pass = false;
};

LeftHilbertReport left_hilbert_algebra_check(const crossed::GroupAction& theta,
                                             const Mat& rho, double tol,
                                             std::uint64_t seed = 0);

}  // namespace takdual::modular

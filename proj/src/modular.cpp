#include "takdual/modular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace takdual::modular {

using num::AmbiguityError;
using num::Cplx;
using num::PreconditionError;

namespace {

// Project an ambient density onto M (trace-preserving conditional
// expectation) and reject non-faithful functionals. The relative floor on
// the smallest eigenvalue keeps modular inverses bounded.
Mat project_density(const OperatorAlgebra& m, const Mat& rho, double /*tol*/) {
  if (rho.rows() != m.dim() || rho.cols() != m.dim())
    throw PreconditionError("modular: density dimension mismatch");
  Mat rho_m = m.project(0.5 * (rho + rho.adjoint()));
  rho_m = 0.5 * (rho_m + rho_m.adjoint());
  num::HermEig e = num::eig_hermitian(rho_m);
  const double max_eig = e.values.maxCoeff();
  if (max_eig <= 0)
    throw PreconditionError("modular: functional is not positive on M");
  if (e.values.minCoeff() <= 1e-8 * max_eig) {
    // Identify the offending central block for the diagnostic.
    std::ostringstream os;
    os << "modular: functional is not faithful on M (smallest eigenvalue "
       << e.values.minCoeff() << ")";
    try {
      vna::SectorDecomposition dec = vna::sector_decompose(m, 1e-9);
      for (size_t k = 0; k < dec.sectors.size(); ++k) {
        const Mat& z = dec.sectors[k].central_projection;
        Mat compressed = z * rho_m * z;
        num::HermEig ce = num::eig_hermitian(compressed + (Mat::Identity(m.dim(), m.dim()) - z));
        if (ce.values.minCoeff() <= 1e-8 * max_eig) {
          os << "; offending block " << k;
          break;
        }
      }
    } catch (...) {
    }
    throw PreconditionError(os.str());
  }
  return rho_m;
}

}  // namespace

StandardForm StandardForm::build(std::shared_ptr<const OperatorAlgebra> m,
                                 const Mat& rho, double tol) {
  StandardForm sf;
  sf.m_ = std::move(m);
  sf.rho_m_ = project_density(*sf.m_, rho, tol);
  sf.rho_sqrt_ = num::herm_sqrt(sf.rho_m_);
  sf.rho_inv_ = num::herm_inverse(sf.rho_m_);
  sf.rho_inv_sqrt_ = num::herm_inverse(sf.rho_sqrt_);

  // phi-orthonormal basis of M from the Gram matrix on the HS-orthonormal one.
  const auto& basis = sf.m_->basis();
  const Index n = static_cast<Index>(basis.size());
  Mat gram(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      gram(i, j) = (sf.rho_m_ * basis[static_cast<size_t>(i)].adjoint() *
                    basis[static_cast<size_t>(j)])
                       .trace();
  gram = 0.5 * (gram + gram.adjoint());
  num::HermEig ge = num::eig_hermitian(gram);
  if (ge.values.minCoeff() <= 1e-12 * std::max(ge.values.maxCoeff(), 1.0))
    throw PreconditionError("modular: GNS inner product degenerate");
  for (Index k = 0; k < n; ++k) {
    Mat g = Mat::Zero(sf.m_->dim(), sf.m_->dim());
    for (Index i = 0; i < n; ++i) g += ge.vectors(i, k) * basis[static_cast<size_t>(i)];
    g /= std::sqrt(ge.values[k]);
    sf.gns_basis_.push_back(std::move(g));
  }
  return sf;
}

StandardForm standard_form(std::shared_ptr<const OperatorAlgebra> m, const Mat& rho,
                           double tol) {
  return StandardForm::build(std::move(m), rho, tol);
}

CVec StandardForm::coords(const Mat& x) const {
  CVec c(gns_dim());
  for (Index k = 0; k < gns_dim(); ++k)
    c[k] = (rho_m_ * gns_basis_[static_cast<size_t>(k)].adjoint() * x).trace();
  return c;
}

Mat StandardForm::element(const CVec& c) const {
  Mat x = Mat::Zero(m_->dim(), m_->dim());
  for (Index k = 0; k < gns_dim(); ++k) x += c[k] * gns_basis_[static_cast<size_t>(k)];
  return x;
}

CVec StandardForm::omega() const { return coords(Mat::Identity(m_->dim(), m_->dim())); }

Mat StandardForm::left_matrix(const Mat& x) const {
  Mat l(gns_dim(), gns_dim());
  for (Index j = 0; j < gns_dim(); ++j) {
    CVec col = coords(x * gns_basis_[static_cast<size_t>(j)]);
    l.col(j) = col;
  }
  return l;
}

Mat StandardForm::delta_matrix() const {
  Mat d(gns_dim(), gns_dim());
  for (Index j = 0; j < gns_dim(); ++j)
    d.col(j) = coords(rho_m_ * gns_basis_[static_cast<size_t>(j)] * rho_inv_);
  return 0.5 * (d + d.adjoint()).eval();
}

Mat StandardForm::delta_imaginary_power(double t) const {
  return num::herm_imaginary_power(delta_matrix(), t);
}

Mat StandardForm::s_antilinear() const {
  Mat c(gns_dim(), gns_dim());
  for (Index j = 0; j < gns_dim(); ++j)
    c.col(j) = coords(gns_basis_[static_cast<size_t>(j)].adjoint());
  return c;
}

Mat StandardForm::j_antilinear() const {
  Mat c(gns_dim(), gns_dim());
  for (Index j = 0; j < gns_dim(); ++j)
    c.col(j) = coords(rho_sqrt_ * gns_basis_[static_cast<size_t>(j)].adjoint() *
                      rho_inv_sqrt_);
  return c;
}

Mat StandardForm::sigma(const Mat& x, double t) const {
  Mat rho_it = num::herm_imaginary_power(rho_m_, t);
  return rho_it * x * rho_it.adjoint();
}

Mat StandardForm::sigma_minus_i(const Mat& x) const { return rho_m_ * x * rho_inv_; }

Mat StandardForm::covariant_implementer(
    const std::function<Mat(const Mat&)>& theta) const {
  // In the Hilbert-Schmidt picture x rho^{1/2} the standard implementation
  // is a -> theta(a); pulled back to GNS coordinates it multiplies by
  // theta(rho^{1/2}) rho^{-1/2} on the right.
  Mat twist = theta(rho_sqrt_) * rho_inv_sqrt_;
  Mat u(gns_dim(), gns_dim());
  for (Index j = 0; j < gns_dim(); ++j)
    u.col(j) = coords(theta(gns_basis_[static_cast<size_t>(j)]) * twist);
  return u;
}

StandardFormReport verify_standard_form(const StandardForm& sf, double tol,
                                        std::uint64_t seed) {
  StandardFormReport report;
  const Index n = sf.gns_dim();
  num::Rng rng(seed ^ 0x51ed270b);
  Mat s = sf.s_antilinear();
  Mat j = sf.j_antilinear();
  Mat delta = sf.delta_matrix();

  // S(x Omega) = x^dagger Omega and <Sx, Sy> = <y, Delta x> on random data.
  for (int trial = 0; trial < 8; ++trial) {
    CVec cx = rng.gaussian_matrix(n, 1).col(0);
    CVec cy = rng.gaussian_matrix(n, 1).col(0);
    Mat x = sf.element(cx);
    report.s_residual = std::max(
        report.s_residual, (s * cx.conjugate() - sf.coords(x.adjoint())).norm() / cx.norm());
    Cplx lhs = (s * cx.conjugate()).dot(s * cy.conjugate());
    Cplx rhs = cy.dot(delta * cx);
    report.delta_sts_residual =
        std::max(report.delta_sts_residual, std::abs(lhs - rhs) / (cx.norm() * cy.norm()));
  }
  report.j_squared_residual = (j * j.conjugate() - Mat::Identity(n, n)).norm();

  // J Delta^{1/2} c = S c for all c (polar decomposition consistency).
  Mat sqrt_delta = num::herm_sqrt(delta);
  report.j_cone_residual = (j * sqrt_delta.conjugate() - s).norm() / std::max(1.0, s.norm());

  // J M J = M' inside B(GNS).
  std::vector<Mat> left_ops, jmj_ops;
  for (const Mat& b : sf.algebra().basis()) {
    Mat l = sf.left_matrix(b);
    jmj_ops.push_back(j * l.conjugate() * j.conjugate());
    left_ops.push_back(std::move(l));
  }
  vna::OperatorAlgebra mprime = vna::commutant(left_ops, n, tol);
  num::MatSubspace jmj = num::MatSubspace::from_span(jmj_ops, tol);
  report.jmj_is_commutant = mprime.subspace().equals(jmj, std::max(tol, 1e-8) * 10);

  // sigma_t stability and the one-parameter group law.
  const double ts[] = {0.3, 1.0, std::sqrt(2.0)};
  for (double t : ts)
    for (const Mat& b : sf.algebra().generators()) {
      Mat moved = sf.sigma(b, t);
      report.sigma_stability_residual =
          std::max(report.sigma_stability_residual,
                   (moved - sf.algebra().project(moved)).norm() / std::max(1.0, moved.norm()));
    }
  for (const Mat& b : sf.algebra().generators()) {
    Mat lhs = sf.sigma(b, 0.3 + 1.0);
    Mat rhs = sf.sigma(sf.sigma(b, 1.0), 0.3);
    report.sigma_group_residual =
        std::max(report.sigma_group_residual, (lhs - rhs).norm() / std::max(1.0, lhs.norm()));
  }

  num::HermEig de = num::eig_hermitian(delta);
  report.delta_spectrum.assign(de.values.data(), de.values.data() + de.values.size());
  return report;
}

double kms_residual(const StandardForm& sf, const Mat& x, const Mat& y) {
  Cplx lhs = sf.phi(x * y);
  Cplx rhs = sf.phi(y * sf.sigma_minus_i(x));
  return std::abs(lhs - rhs);
}

Mat StandardForm::relative_modular(const Mat& rho_psi, double tol) const {
  Mat psi_m = project_density(*m_, rho_psi, tol);
  Mat rel(gns_dim(), gns_dim());
  for (Index j = 0; j < gns_dim(); ++j)
    rel.col(j) = coords(psi_m * gns_basis_[static_cast<size_t>(j)] * rho_inv_);
  return 0.5 * (rel + rel.adjoint()).eval();
}

Mat relative_modular_matrix(const OperatorAlgebra& m, const Mat& rho_psi,
                            const Mat& rho_phi, double tol) {
  auto mp = std::make_shared<OperatorAlgebra>(m);
  StandardForm sf = StandardForm::build(mp, rho_phi, tol);
  return sf.relative_modular(rho_psi, tol);
}

Mat connes_cocycle(const OperatorAlgebra& m, const Mat& rho_psi, const Mat& rho_phi,
                   double t, double tol) {
  Mat psi_m = project_density(m, rho_psi, tol);
  Mat phi_m = project_density(m, rho_phi, tol);
  return num::herm_imaginary_power(psi_m, t) * num::herm_imaginary_power(phi_m, -t);
}

DualWeightReport dual_weight_check(const crossed::GroupAction& theta, const Mat& rho,
                                   const std::vector<double>& times, double tol,
                                   std::uint64_t seed) {
  DualWeightReport report;
  report.times = times;
  const auto& group = theta.group();
  const int n = group.order();
  auto n_ptr = theta.algebra_ptr();
  StandardForm sf = StandardForm::build(n_ptr, rho, tol);
  const Index m = sf.gns_dim();

  // Densities of phi compose theta_s are theta_s^{-1}(rho); the relative
  // modular matrices D_s then assemble Delta~ blockwise over l^2(G).
  std::vector<Mat> d_s(static_cast<size_t>(n));
  std::vector<Mat> u_s(static_cast<size_t>(n));
  for (int s = 0; s < n; ++s) {
    Mat rho_s = theta.apply_inverse(s, sf.density());
    d_s[static_cast<size_t>(s)] = sf.relative_modular(rho_s, tol);
    u_s[static_cast<size_t>(s)] =
        sf.covariant_implementer([&](const Mat& x) { return theta.apply(s, x); });
  }

  auto pi_theta = [&](const Mat& x) {
    Mat out = Mat::Zero(m * n, m * n);
    for (int s = 0; s < n; ++s) {
      Mat block = sf.left_matrix(theta.apply_inverse(s, x));
      for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k) out(i * n + s, k * n + s) = block(i, k);
    }
    return out;
  };
  auto lambda_g = [&](int g) {
    return num::kron(Mat::Identity(m, m), group.left_translation(g));
  };

  for (double t : times) {
    Mat delta_it = Mat::Zero(m * n, m * n);
    for (int s = 0; s < n; ++s) {
      Mat pw = num::herm_imaginary_power(d_s[static_cast<size_t>(s)], t);
      for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k) delta_it(i * n + s, k * n + s) = pw(i, k);
    }
    Mat delta_it_inv = delta_it.adjoint();

    // sigma_t^{dual}(pi_theta(X)) = pi_theta(sigma_t^phi(X))
    for (const Mat& x : theta.algebra().generators()) {
      Mat lhs = delta_it * pi_theta(x) * delta_it_inv;
      Mat rhs = pi_theta(sf.sigma(x, t));
      report.generator_residual_algebra = std::max(
          report.generator_residual_algebra, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
    }
    // sigma_t^{dual}(lambda(s)) = lambda(s) pi_theta((D phi theta_s : D phi)_t)
    for (int s = 0; s < n; ++s) {
      Mat rho_s = theta.apply_inverse(s, sf.density());
      Mat cocycle = num::herm_imaginary_power(project_density(theta.algebra(), rho_s, tol), t) *
                    num::herm_imaginary_power(sf.density(), -t);
      Mat lhs = delta_it * lambda_g(s) * delta_it_inv;
      Mat rhs = lambda_g(s) * pi_theta(cocycle);
      report.generator_residual_lambda = std::max(
          report.generator_residual_lambda, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
    }
  }

  // J~ xi (s) = U_phi(s) J_phi xi(s^{-1}).
  Mat j_phi = sf.j_antilinear();
  Mat j_tilde = Mat::Zero(m * n, m * n);
  for (int s = 0; s < n; ++s) {
    Mat block = u_s[static_cast<size_t>(s)] * j_phi;
    int sinv = group.inverse(s);
    for (Index i = 0; i < m; ++i)
      for (Index k = 0; k < m; ++k) j_tilde(i * n + s, k * n + sinv) = block(i, k);
  }
  report.j_squared_residual =
      (j_tilde * j_tilde.conjugate() - Mat::Identity(m * n, m * n)).norm();

  // Honest modular pair from the left Hilbert algebra itself: the sharp map
  // S~ xi (s) = eta( theta_s( x(s^{-1})^dagger ) ) gives Delta_lha = S~* S~
  // and its polar part must reproduce the displayed J~. Blockwise Delta_lha
  // carries the relative modular operators of the translated functionals on
  // the opposite side, so both index conventions get exercised.
  Mat s_tilde = Mat::Zero(m * n, m * n);
  for (int s = 0; s < n; ++s) {
    int sinv = group.inverse(s);
    for (Index k = 0; k < m; ++k) {
      Mat elem = sf.element(CVec::Unit(m, k));
      CVec out = sf.coords(theta.apply(s, elem.adjoint().eval()));
      for (Index i = 0; i < m; ++i) s_tilde(i * n + s, k * n + sinv) = out[i];
    }
  }
  Mat delta_lha = (s_tilde.adjoint() * s_tilde).conjugate();
  double lha_block_residual = 0;
  {
    Mat expected = Mat::Zero(m * n, m * n);
    for (int s = 0; s < n; ++s) {
      Mat d = sf.relative_modular(theta.apply(s, sf.density()), tol);
      for (Index i = 0; i < m; ++i)
        for (Index k = 0; k < m; ++k) expected(i * n + s, k * n + s) = d(i, k);
    }
    lha_block_residual = (delta_lha - expected).norm();
  }
  Mat delta_lha_inv_sqrt =
      num::herm_function(delta_lha, [](double x) { return num::Cplx(1.0 / std::sqrt(x), 0); });
  double polar_residual = (j_tilde - s_tilde * delta_lha_inv_sqrt.conjugate()).norm();
  Mat jdj = j_tilde * delta_lha.conjugate() * j_tilde.conjugate();
  double jdj_residual = (jdj - num::herm_inverse(delta_lha)).norm() /
                        std::max(1.0, delta_lha.norm());
  report.j_squared_residual = std::max(
      {report.j_squared_residual, lha_block_residual, polar_residual, jdj_residual});

  // J~ carries the left von Neumann algebra of the Hilbert algebra (spanned
  // by L_X (x) 1 and U(s) (x) lambda_s) into its commutant.
  std::vector<Mat> gens;
  for (const Mat& x : theta.algebra().generators())
    gens.push_back(num::kron(sf.left_matrix(x), Mat::Identity(n, n)));
  for (int g = 1; g < n; ++g)
    gens.push_back(num::kron(u_s[static_cast<size_t>(g)], group.left_translation(g)));
  if (gens.empty()) gens.push_back(Mat::Identity(m * n, m * n));
  for (const Mat& a : gens) {
    Mat ja = j_tilde * a.conjugate() * j_tilde.conjugate();
    for (const Mat& b : gens)
      report.j_commutant_residual =
          std::max(report.j_commutant_residual,
                   (ja * b - b * ja).norm() / std::max(1.0, a.norm() * b.norm()));
  }

  // Delta~ positivity at t -> formal generator: check the block matrices.
  double min_eig = std::numeric_limits<double>::infinity();
  for (int s = 0; s < n; ++s) {
    num::HermEig e = num::eig_hermitian(d_s[static_cast<size_t>(s)]);
    min_eig = std::min(min_eig, e.values.minCoeff());
  }
  report.delta_positivity = min_eig;

  report.pass = report.generator_residual_algebra <= 1e-9 &&
                report.generator_residual_lambda <= 1e-9 &&
                report.j_squared_residual <= 1e-8 &&
                report.j_commutant_residual <= 1e-8 && report.delta_positivity > 0;
  (void)seed;
  return report;
}

LeftHilbertReport left_hilbert_algebra_check(const crossed::GroupAction& theta,
                                             const Mat& rho, double tol,
                                             std::uint64_t seed) {
  LeftHilbertReport report;
  const auto& group = theta.group();
  const int n = group.order();
  auto n_ptr = theta.algebra_ptr();
  StandardForm sf = StandardForm::build(n_ptr, rho, tol);
  const Index m = sf.gns_dim();
  num::Rng rng(seed ^ 0x77aa11bb);

  std::vector<Mat> u_s(static_cast<size_t>(n));
  for (int s = 0; s < n; ++s)
    u_s[static_cast<size_t>(s)] =
        sf.covariant_implementer([&](const Mat& x) { return theta.apply(s, x); });

  auto random_element = [&]() {
    Mat x = Mat::Zero(theta.algebra().dim(), theta.algebra().dim());
    for (const Mat& b : theta.algebra().basis())
      x += Cplx(rng.gauss(), rng.gauss()) * b;
    return x / std::max(1.0, x.norm());
  };
  auto random_function = [&]() {
    crossed::MFunction f(static_cast<size_t>(n));
    for (int s = 0; s < n; ++s) f[static_cast<size_t>(s)] = random_element();
    return f;
  };

  // pi~(X) = sum_s L_{X(s)} U(s) (x) lambda_s.
  auto pi_tilde = [&](const crossed::MFunction& x) {
    Mat out = Mat::Zero(m * n, m * n);
    for (int s = 0; s < n; ++s)
      out += num::kron((sf.left_matrix(x[static_cast<size_t>(s)]) *
                        u_s[static_cast<size_t>(s)])
                           .eval(),
                       group.left_translation(s));
    return out;
  };

  for (int trial = 0; trial < 4; ++trial) {
    crossed::MFunction x = random_function();
    crossed::MFunction y = random_function();
    Mat a = random_element();

    crossed::MFunction conv = crossed::convolution_product(x, y, theta);
    report.homomorphism_residual =
        std::max(report.homomorphism_residual,
                 (pi_tilde(conv) - pi_tilde(x) * pi_tilde(y)).norm());

    crossed::MFunction xs = crossed::involution(x, theta);
    report.involution_residual = std::max(
        report.involution_residual, (pi_tilde(xs) - pi_tilde(x).adjoint()).norm());

    crossed::MFunction xss = crossed::involution(xs, theta);
    double dres = 0;
    for (int s = 0; s < n; ++s)
      dres = std::max(dres, (xss[static_cast<size_t>(s)] - x[static_cast<size_t>(s)]).norm());
    report.double_involution_residual = std::max(report.double_involution_residual, dres);

    crossed::MFunction unit = crossed::delta_unit(theta);
    crossed::MFunction left = crossed::convolution_product(unit, x, theta);
    crossed::MFunction right = crossed::convolution_product(x, unit, theta);
    for (int s = 0; s < n; ++s) {
      report.unit_residual = std::max(
          report.unit_residual,
          (left[static_cast<size_t>(s)] - x[static_cast<size_t>(s)]).norm());
      report.unit_residual = std::max(
          report.unit_residual,
          (right[static_cast<size_t>(s)] - x[static_cast<size_t>(s)]).norm());
    }

    // Bimodule structure: A.(X*Y) = (A.X)*Y, (X*Y).A = X*(Y.A),
    // (X.A)^# = A^dagger . X^#, (A.X)^# = X^# . A^dagger.
    auto left_act = [&](const Mat& aa, const crossed::MFunction& f) {
      crossed::MFunction out(static_cast<size_t>(n));
      for (int s = 0; s < n; ++s) out[static_cast<size_t>(s)] = aa * f[static_cast<size_t>(s)];
      return out;
    };
    auto right_act = [&](const crossed::MFunction& f, const Mat& aa) {
      crossed::MFunction out(static_cast<size_t>(n));
      for (int s = 0; s < n; ++s)
        out[static_cast<size_t>(s)] = f[static_cast<size_t>(s)] * theta.apply(s, aa);
      return out;
    };
    auto diff = [&](const crossed::MFunction& f, const crossed::MFunction& g) {
      double r = 0;
      for (int s = 0; s < n; ++s)
        r = std::max(r, (f[static_cast<size_t>(s)] - g[static_cast<size_t>(s)]).norm());
      return r;
    };
    report.bimodule_residual = std::max(
        report.bimodule_residual,
        diff(left_act(a, crossed::convolution_product(x, y, theta)),
             crossed::convolution_product(left_act(a, x), y, theta)));
    report.bimodule_residual = std::max(
        report.bimodule_residual,
        diff(right_act(crossed::convolution_product(x, y, theta), a),
             crossed::convolution_product(x, right_act(y, a), theta)));
    report.bimodule_residual =
        std::max(report.bimodule_residual,
                 diff(crossed::involution(right_act(x, a), theta),
                      left_act(a.adjoint(), crossed::involution(x, theta))));
    report.bimodule_residual =
        std::max(report.bimodule_residual,
                 diff(crossed::involution(left_act(a, x), theta),
                      right_act(crossed::involution(x, theta), a.adjoint())));
  }

  report.pass = report.homomorphism_residual <= 1e-10 &&
                report.involution_residual <= 1e-10 &&
                report.double_involution_residual <= 1e-10 &&
                report.unit_residual <= 1e-12 && report.bimodule_residual <= 1e-10;
  return report;
}

}  // namespace takdual::modular

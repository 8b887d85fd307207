#include "takdual/crossed.hpp"

#include <algorithm>
#include <cmath>

namespace takdual::crossed {

using num::Cplx;
using num::CVec;
using num::PreconditionError;

GroupAction GroupAction::from_unitaries(FiniteAbelianGroup group,
                                        std::shared_ptr<const OperatorAlgebra> algebra,
                                        std::vector<Mat> implementers, double tol) {
  const Index d = algebra->dim();
  const int n = group.order();
  if (static_cast<int>(implementers.size()) != n)
    throw PreconditionError("action: one implementer per group element required");
  const double check_tol = std::max(tol, 1e-8) * 10;
  for (const Mat& w : implementers) {
    if (w.rows() != d || w.cols() != d)
      throw PreconditionError("action: implementer dimension mismatch");
    if ((w * w.adjoint() - Mat::Identity(d, d)).norm() > 1e-8)
      throw PreconditionError("action: implementer is not unitary");
  }
  // alpha_e = id and alpha_u alpha_v = alpha_uv as automorphisms of M.
  for (const Mat& b : algebra->generators()) {
    const Mat& we = implementers[static_cast<size_t>(group.identity())];
    if ((we * b * we.adjoint() - b).norm() > check_tol * std::max(1.0, b.norm()))
      throw PreconditionError("action: identity element does not act trivially");
  }
  for (int u = 0; u < n; ++u)
    for (const Mat& b : algebra->generators()) {
      Mat moved = implementers[static_cast<size_t>(u)] * b *
                  implementers[static_cast<size_t>(u)].adjoint();
      if (!algebra->contains(moved, check_tol))
        throw PreconditionError("action: automorphism leaves the algebra");
    }
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      const Mat& wu = implementers[static_cast<size_t>(u)];
      const Mat& wv = implementers[static_cast<size_t>(v)];
      const Mat& wuv = implementers[static_cast<size_t>(group.compose(u, v))];
      for (const Mat& b : algebra->generators()) {
        Mat lhs = wu * (wv * b * wv.adjoint()) * wu.adjoint();
        Mat rhs = wuv * b * wuv.adjoint();
        if ((lhs - rhs).norm() > check_tol * std::max(1.0, b.norm()))
          throw PreconditionError("action: composition law fails");
      }
    }

  GroupAction a;
  a.group_ = std::move(group);
  a.algebra_ = std::move(algebra);
  a.inner_ = true;
  for (const Mat& w : implementers)
    if (!a.algebra_->contains(w, check_tol)) a.inner_ = false;
  a.implementers_ = std::move(implementers);
  return a;
}

GroupAction GroupAction::from_generator_unitaries(
    FiniteAbelianGroup group, std::shared_ptr<const OperatorAlgebra> algebra,
    const std::vector<Mat>& generator_unitaries, double tol) {
  const Index d = algebra->dim();
  if (static_cast<int>(generator_unitaries.size()) != group.rank())
    throw PreconditionError("action: one unitary per cyclic factor required");
  std::vector<Mat> implementers(static_cast<size_t>(group.order()));
  for (int u = 0; u < group.order(); ++u) {
    std::vector<int> t = group.tuple(u);
    Mat w = Mat::Identity(d, d);
    for (size_t j = 0; j < t.size(); ++j)
      for (int k = 0; k < t[j]; ++k) w = generator_unitaries[j] * w;
    implementers[static_cast<size_t>(u)] = std::move(w);
  }
  return from_unitaries(std::move(group), std::move(algebra), std::move(implementers), tol);
}

GroupAction GroupAction::trivial(FiniteAbelianGroup group,
                                 std::shared_ptr<const OperatorAlgebra> algebra) {
  const Index d = algebra->dim();
  std::vector<Mat> impl(static_cast<size_t>(group.order()), Mat::Identity(d, d));
  return from_unitaries(std::move(group), std::move(algebra), std::move(impl), 1e-9);
}

Mat GroupAction::apply(int u, const Mat& x) const {
  const Mat& w = implementers_[static_cast<size_t>(u)];
  return w * x * w.adjoint();
}

Mat GroupAction::apply_inverse(int u, const Mat& x) const {
  const Mat& w = implementers_[static_cast<size_t>(u)];
  return w.adjoint() * x * w;
}

Mat covariant_embedding(const GroupAction& action, const Mat& x) {
  const Index d = action.algebra().dim();
  const int n = action.group().order();
  Mat out = Mat::Zero(d * n, d * n);
  for (int u = 0; u < n; ++u) {
    Mat block = action.apply_inverse(u, x);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j) out(i * n + u, j * n + u) = block(i, j);
  }
  return out;
}

Mat lambda_embedding(const GroupAction& action, int u) {
  const Index d = action.algebra().dim();
  return num::kron(Mat::Identity(d, d), action.group().left_translation(u));
}

CrossedProduct crossed_product(const GroupAction& action, double tol,
                               std::uint64_t seed) {
  const Index d = action.algebra().dim();
  const int n = action.group().order();

  std::vector<Mat> gens;
  for (const Mat& g : action.algebra().generators()) gens.push_back(covariant_embedding(action, g));
  for (int u = 1; u < n; ++u) gens.push_back(lambda_embedding(action, u));
  if (gens.empty()) gens.push_back(Mat::Identity(d * n, d * n));

  vna::Generated generated = vna::generate_with_commutant(gens, d * n, tol, seed);

  CrossedProduct c;
  c.action = action;
  c.base_dim = d;
  c.ambient = d * n;
  c.algebra = std::move(generated.algebra);
  c.commutant = std::move(generated.commutant);
  c.invariant = vna::sector_decompose(c.algebra, tol, seed).invariant();

  // Covariance: (1 (x) lambda_u) pi(X) (1 (x) lambda_u)* = pi(alpha_u(X)).
  double worst = 0;
  for (int u = 0; u < n; ++u) {
    Mat lam = lambda_embedding(action, u);
    for (const Mat& g : action.algebra().generators()) {
      Mat lhs = lam * covariant_embedding(action, g) * lam.adjoint();
      Mat rhs = covariant_embedding(action, action.apply(u, g));
      worst = std::max(worst, (lhs - rhs).norm());
    }
  }
  c.covariance_residual = worst;
  return c;
}

MFunction convolution_product(const MFunction& x, const MFunction& y,
                              const GroupAction& action) {
  const int n = action.group().order();
  const Index d = action.algebra().dim();
  MFunction out(static_cast<size_t>(n), Mat::Zero(d, d));
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      int w = action.group().compose(action.group().inverse(v), u);  // v^{-1} u
      out[static_cast<size_t>(u)] +=
          x[static_cast<size_t>(v)] * action.apply(v, y[static_cast<size_t>(w)]);
    }
  return out;
}

MFunction involution(const MFunction& x, const GroupAction& action) {
  const int n = action.group().order();
  MFunction out(static_cast<size_t>(n));
  for (int u = 0; u < n; ++u) {
    int inv = action.group().inverse(u);
    out[static_cast<size_t>(u)] =
        action.apply(u, x[static_cast<size_t>(inv)]).adjoint();
  }
  return out;
}

MFunction delta_unit(const GroupAction& action) {
  const int n = action.group().order();
  const Index d = action.algebra().dim();
  MFunction out(static_cast<size_t>(n), Mat::Zero(d, d));
  out[static_cast<size_t>(action.group().identity())] = Mat::Identity(d, d);
  return out;
}

Mat op_fourier(const MFunction& x, const GroupAction& action) {
  const int n = action.group().order();
  const Index d = action.algebra().dim();
  Mat out = Mat::Zero(d * n, d * n);
  for (int u = 0; u < n; ++u)
    out += covariant_embedding(action, x[static_cast<size_t>(u)]) *
           lambda_embedding(action, u);
  return out;
}

GroupAction dual_action(const CrossedProduct& c, const DualGroup& dual, double tol) {
  const Index d = c.base_dim;
  const int n = c.action.group().order();
  std::vector<Mat> implementers;
  implementers.reserve(static_cast<size_t>(dual.size()));
  for (int g = 0; g < dual.size(); ++g) {
    groups::Character chi = dual.character(g);
    Mat m_gamma = Mat::Zero(n, n);
    for (int u = 0; u < n; ++u) m_gamma(u, u) = chi(u);
    implementers.push_back(num::kron(Mat::Identity(d, d), m_gamma));
  }
  auto algebra = std::make_shared<OperatorAlgebra>(c.algebra);
  return GroupAction::from_unitaries(dual.as_group(), std::move(algebra),
                                     std::move(implementers), tol);
}

double dual_coaction_residual(const CrossedProduct& c, const DualGroup& dual) {
  const Index dn = c.ambient;
  const int n = c.action.group().order();
  kt::KTOperator w = kt::build_W(c.action.group());
  Mat sigma = num::flip_operator(n, n);
  Mat conj_op = num::kron(Mat::Identity(c.base_dim, c.base_dim),
                          (sigma * w.matrix.adjoint() * sigma).eval());

  // Spectral projections q_gamma of the regular representation.
  std::vector<Mat> q(static_cast<size_t>(dual.size()), Mat::Zero(n, n));
  for (int g = 0; g < dual.size(); ++g) {
    groups::Character chi = dual.character(g);
    for (int u = 0; u < n; ++u)
      q[static_cast<size_t>(g)] += std::conj(chi(u)) * c.action.group().left_translation(u);
    q[static_cast<size_t>(g)] /= static_cast<double>(n);
  }

  GroupAction hat = dual_action(c, dual, 1e-9);
  std::vector<Mat> gens;
  for (const Mat& g : c.action.algebra().generators()) gens.push_back(c.pi(g));
  for (int u = 1; u < n; ++u) gens.push_back(c.lambda(u));

  double worst = 0;
  for (const Mat& y : gens) {
    Mat lhs = conj_op * num::kron(y, Mat::Identity(n, n)) * conj_op.adjoint();
    Mat rhs = Mat::Zero(dn * n, dn * n);
    for (int g = 0; g < dual.size(); ++g)
      rhs += num::kron(hat.apply(g, y), q[static_cast<size_t>(g)]);
    worst = std::max(worst, (lhs - rhs).norm());
  }
  return worst;
}

OperatorAlgebra amplification(const OperatorAlgebra& m,
                              const FiniteAbelianGroup& group, double tol,
                              std::uint64_t seed) {
  const Index d = m.dim();
  const int n = group.order();
  std::vector<Mat> gens;
  for (const Mat& g : m.generators()) gens.push_back(num::kron(g, Mat::Identity(n, n)));
  if (n > 1) {
    Mat shift = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) shift((i + 1) % n, i) = 1.0;
    Mat e01 = Mat::Zero(n, n);
    e01(0, n > 1 ? 1 : 0) = 1.0;
    gens.push_back(num::kron(Mat::Identity(d, d), shift));
    gens.push_back(num::kron(Mat::Identity(d, d), e01));
  }
  return vna::generate(gens, d * n, tol, seed);
}

DualityReport takesaki_duality_check(const GroupAction& action, double tol,
                                     std::uint64_t seed) {
  DualGroup dual(action.group());
  CrossedProduct first = crossed_product(action, tol, seed);
  GroupAction hat = dual_action(first, dual, tol);
  CrossedProduct second = crossed_product(hat, tol, seed);

  OperatorAlgebra amp = amplification(action.algebra(), action.group(), tol, seed);

  DualityReport report;
  report.second_crossed = second.invariant;
  report.amplified = vna::sector_decompose(amp, tol, seed).invariant();
  report.match = report.second_crossed.abstract_equal(report.amplified);
  report.note =
      "further isomorphism with M itself requires a properly infinite algebra; "
      "not applicable at finite dimension";
  return report;
}

OperatorAlgebra fixed_point_algebra(const GroupAction& action, double tol) {
  const Index d = action.algebra().dim();
  const auto& basis = action.algebra().basis();
  const Index m = static_cast<Index>(basis.size());
  const int n = action.group().order();
  Mat constraints(static_cast<Index>(d) * d * (n - 1 > 0 ? n - 1 : 1), m);
  constraints.setZero();
  Index row_block = 0;
  for (int u = 1; u < n; ++u) {
    for (Index i = 0; i < m; ++i) {
      Mat moved = action.apply(u, basis[static_cast<size_t>(i)]) - basis[static_cast<size_t>(i)];
      constraints.block(row_block * d * d, i, d * d, 1) = num::to_vec(moved);
    }
    ++row_block;
  }
  Mat coeffs = (n == 1) ? Mat::Identity(m, m) : num::nullspace(constraints, tol);
  std::vector<Mat> fixed_basis;
  for (Index k = 0; k < coeffs.cols(); ++k) {
    Mat x = Mat::Zero(d, d);
    for (Index i = 0; i < m; ++i) x += coeffs(i, k) * basis[static_cast<size_t>(i)];
    fixed_basis.push_back(std::move(x));
  }
  if (fixed_basis.empty())
    throw PreconditionError("fixed_point_algebra: empty fixed-point set");
  return OperatorAlgebra(d, std::move(fixed_basis), {});
}

Theorem1Report theorem1_split_check(const GroupAction& action,
                                    const OperatorAlgebra& masa, double tol,
                                    std::uint64_t seed) {
  Theorem1Report report;
  const OperatorAlgebra& m = action.algebra();

  // Hypotheses of the split duality: A = A' cap M = M^alpha = U''.
  try {
    report.masa_ok = vna::is_masa(masa, m, tol);
  } catch (const PreconditionError&) {
    report.masa_ok = false;
  }
  OperatorAlgebra fixed = fixed_point_algebra(action, tol);
  report.fixed_point_ok = fixed.subspace().equals(masa.subspace(), std::max(tol, 1e-8) * 10);
  if (action.inner()) {
    std::vector<Mat> embedded;
    for (int u = 0; u < action.group().order(); ++u)
      embedded.push_back(action.implementer(u));
    OperatorAlgebra generated = vna::generate(embedded, m.dim(), tol, seed);
    report.generating_ok =
        generated.subspace().equals(masa.subspace(), std::max(tol, 1e-8) * 10);
  } else {
    report.generating_ok = false;
  }
  report.hypotheses_ok = report.masa_ok && report.fixed_point_ok && report.generating_ok;
  if (!report.masa_ok)
    report.hypothesis_diagnostic = "not-a-MASA";
  else if (!report.fixed_point_ok)
    report.hypothesis_diagnostic = "not-fixed-point";
  else if (!report.generating_ok)
    report.hypothesis_diagnostic = "U does not generate A";

  // Part (i): M x| U vs A (x) B(l^2(U)).
  DualGroup dual(action.group());
  CrossedProduct first = crossed_product(action, tol, seed);
  report.crossed_inv = first.invariant;
  OperatorAlgebra amp_a = amplification(masa, action.group(), tol, seed);
  report.amplification_side = vna::sector_decompose(amp_a, tol, seed).invariant();
  report.amplification_match =
      report.crossed_inv.abstract_equal(report.amplification_side);

  // Part (ii): the second crossed product of the amplified algebra (the
  // crossed product presented through part (i)) vs M (x) B(l^2(U)).
  GroupAction hat = dual_action(first, dual, tol);
  CrossedProduct second = crossed_product(hat, tol, seed);
  report.second_crossed_inv = second.invariant;
  OperatorAlgebra amp_m = amplification(m, action.group(), tol, seed);
  report.reconstruction_side = vna::sector_decompose(amp_m, tol, seed).invariant();
  report.reconstruction_match =
      report.second_crossed_inv.abstract_equal(report.reconstruction_side);
  return report;
}

SemiDualityReport semi_duality_check(const GroupAction& action, const Mat& witness,
                                     double tol) {
  SemiDualityReport report;
  const Index d = action.algebra().dim();
  const int n = action.group().order();
  if (witness.rows() != d * n || witness.cols() != d * n)
    throw PreconditionError("semi_duality: witness has wrong ambient dimension");
  if ((witness * witness.adjoint() - Mat::Identity(d * n, d * n)).norm() > 1e-8) {
    report.witness_valid = false;
    report.note = "witness is not unitary";
    return report;
  }

  // Decompose v = sum_w Y_w (x) lambda_w; membership in M (x) lambda(U)''
  // requires the block v[(i,wt),(j,t)] to be independent of t.
  std::vector<Mat> y(static_cast<size_t>(n));
  const double block_tol = std::max(tol, 1e-8) * 10;
  for (int w = 0; w < n; ++w) {
    Mat y0(d, d);
    for (Index i = 0; i < d; ++i)
      for (Index j = 0; j < d; ++j)
        y0(i, j) = witness(i * n + action.group().compose(w, 0), j * n + 0);
    for (int t = 1; t < n; ++t) {
      int wt = action.group().compose(w, t);
      for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
          if (std::abs(witness(i * n + wt, j * n + t) - y0(i, j)) > block_tol) {
            report.witness_valid = false;
            report.note = "witness is not in M (x) lambda(U)''";
            return report;
          }
    }
    if (!action.algebra().contains(y0, block_tol) && y0.norm() > block_tol) {
      report.witness_valid = false;
      report.note = "witness coefficients leave M";
      return report;
    }
    y[static_cast<size_t>(w)] = std::move(y0);
  }
  report.witness_valid = true;

  // alpha-bar(v) = sum_{w,u} alpha_u^{-1}(Y_w) (x) lambda_w (x) e_uu.
  const Index total = d * n * n;
  Mat lhs = Mat::Zero(total, total);
  for (int w = 0; w < n; ++w) {
    Mat lam = action.group().left_translation(w);
    for (int u = 0; u < n; ++u) {
      Mat euu = Mat::Zero(n, n);
      euu(u, u) = 1.0;
      lhs += num::kron(num::kron(action.apply_inverse(u, y[static_cast<size_t>(w)]), lam), euu);
    }
  }
  kt::KTOperator vprime = kt::build_V_prime(action.group());
  Mat rhs = num::kron(witness, Mat::Identity(n, n)) *
            num::kron(Mat::Identity(d, d), vprime.matrix);
  report.residual = (lhs - rhs).norm();
  report.holds = report.residual <= std::max(tol, 1e-9) * 100 * std::sqrt(static_cast<double>(total));
  return report;
}

Mat semi_duality_witness(const GroupAction& action, const kt::SpectralMeasure& e) {
  const Index d = action.algebra().dim();
  const int n = action.group().order();
  if (static_cast<int>(e.atoms.size()) != n || !e.injective)
    throw PreconditionError(
        "semi_duality_witness: needs rank-one atoms in bijection with the dual");
  CVec v0 = CVec::Zero(d);
  for (const auto& atom : e.atoms) {
    if (std::abs(atom.projection.trace().real() - 1.0) > 1e-8)
      throw PreconditionError("semi_duality_witness: atom is not rank one");
    // unit vector spanning the atom
    num::HermEig dec = num::eig_hermitian(atom.projection);
    v0 += dec.vectors.col(d - 1);
  }
  v0 /= std::sqrt(static_cast<double>(n));
  Mat q = v0 * v0.adjoint();
  Mat witness = Mat::Zero(d * n, d * n);
  for (int u = 0; u < n; ++u)
    witness += num::kron(action.apply_inverse(u, q), action.group().left_translation(u));
  return witness;
}

}  // namespace takdual::crossed

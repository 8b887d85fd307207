#include "takdual/kt.hpp"

#include <algorithm>
#include <cmath>

namespace takdual::kt {

using groups::Character;
using num::AmbiguityError;
using num::Cplx;
using num::PreconditionError;

namespace {

Mat basis_permutation(Index n, const std::function<std::pair<Index, Index>(Index, Index)>& map) {
  Mat m = Mat::Zero(n * n, n * n);
  for (Index s = 0; s < n; ++s)
    for (Index t = 0; t < n; ++t) {
      auto [a, b] = map(s, t);
      m(a * n + b, s * n + t) = 1.0;
    }
  return m;
}

}  // namespace

KTOperator build_V(const DualGroup& dual) {
  const auto& g = dual.as_group();
  const Index n = g.order();
  Mat m = basis_permutation(n, [&](Index s, Index t) {
    return std::pair<Index, Index>(s, g.compose(static_cast<int>(s), static_cast<int>(t)));
  });
  return KTOperator{std::move(m), n, KTVariant::V};
}

KTOperator build_W(const FiniteAbelianGroup& group) {
  const Index n = group.order();
  Mat m = basis_permutation(n, [&](Index s, Index t) {
    return std::pair<Index, Index>(
        group.compose(group.inverse(static_cast<int>(t)), static_cast<int>(s)), t);
  });
  return KTOperator{std::move(m), n, KTVariant::W};
}

KTOperator build_V_prime(const FiniteAbelianGroup& group) {
  const Index n = group.order();
  Mat m = basis_permutation(n, [&](Index s, Index t) {
    return std::pair<Index, Index>(
        group.compose(static_cast<int>(s), group.inverse(static_cast<int>(t))), t);
  });
  return KTOperator{std::move(m), n, KTVariant::VPrime};
}

double pentagon_residual(const Mat& x, Index n) {
  const std::array<Index, 3> dims{n, n, n};
  Mat x12 = num::embed_two_slots(x, dims, 0, 1);
  Mat x13 = num::embed_two_slots(x, dims, 0, 2);
  Mat x23 = num::embed_two_slots(x, dims, 1, 2);
  return (x12 * x13 * x23 - x23 * x12).norm();
}

double modified_pentagon_residual(const Mat& coupling, Index dim_h, Index n,
                                  const Mat& v) {
  const std::array<Index, 3> dims{dim_h, n, n};
  Mat c12 = num::embed_two_slots(coupling, dims, 0, 1);
  Mat c13 = num::embed_two_slots(coupling, dims, 0, 2);
  Mat v23 = num::kron(Mat::Identity(dim_h, dim_h), v);
  return (c12 * c13 * v23 - v23 * c12).norm();
}

double intertwining_residual_V(const KTOperator& v, const DualGroup& dual) {
  const Index n = v.group_order;
  Mat id = Mat::Identity(n, n);
  double worst = 0;
  for (int g = 0; g < dual.size(); ++g) {
    Mat lam = dual.left_translation(g);
    worst = std::max(worst,
                     (v.matrix * num::kron(lam, id) - num::kron(lam, lam) * v.matrix).norm());
  }
  return worst;
}

double intertwining_residual_W(const KTOperator& w, const FiniteAbelianGroup& group) {
  const Index n = w.group_order;
  Mat id = Mat::Identity(n, n);
  double worst = 0;
  for (int u = 0; u < group.order(); ++u) {
    Mat lam = group.left_translation(u);
    worst = std::max(worst,
                     (w.matrix * num::kron(lam, lam) - num::kron(id, lam) * w.matrix).norm());
  }
  return worst;
}

double fourier_conjugacy_residual(const KTOperator& w, const KTOperator& v,
                                  const FiniteAbelianGroup& group) {
  Mat f = groups::fourier_transform(group);
  Mat ff = num::kron(f, f);
  return (w.matrix - ff.adjoint() * v.matrix * ff).norm();
}

Mat SpectralMeasure::projection_for(int character) const {
  Mat p = Mat::Zero(dim, dim);
  for (const SpectralAtom& a : atoms)
    if (a.character == character) p += a.projection;
  return p;
}

Mat SpectralMeasure::embedded_unitary(const DualGroup& dual, int u) const {
  Mat e = Mat::Zero(dim, dim);
  for (const SpectralAtom& a : atoms) e += dual.character(a.character)(u) * a.projection;
  return e;
}

SpectralMeasure spectral_measure(const vna::OperatorAlgebra& a,
                                 const FiniteAbelianGroup& group,
                                 const std::function<Mat(int)>& embed,
                                 const DualGroup& dual, double tol,
                                 std::uint64_t seed) {
  const Index d = a.dim();
  if (!a.is_abelian(std::max(tol, 1e-9) * 10))
    throw PreconditionError("spectral_measure: algebra is not abelian");

  std::vector<Mat> embedded(static_cast<size_t>(group.order()));
  for (int u = 0; u < group.order(); ++u) {
    Mat e = embed(u);
    if (e.rows() != d || e.cols() != d)
      throw PreconditionError("spectral_measure: embedded unitary has wrong dimension");
    if ((e * e.adjoint() - Mat::Identity(d, d)).norm() > 1e-8)
      throw PreconditionError("spectral_measure: embedded element is not unitary");
    if (!a.contains(e, std::max(tol, 1e-8) * 10))
      throw PreconditionError("spectral_measure: embedded unitary lies outside the algebra");
    embedded[static_cast<size_t>(u)] = std::move(e);
  }
  for (int u = 0; u < group.order(); ++u)
    for (int v = 0; v < group.order(); ++v) {
      const Mat& eu = embedded[static_cast<size_t>(u)];
      const Mat& ev = embedded[static_cast<size_t>(v)];
      if ((eu * ev - ev * eu).norm() > 1e-8)
        throw PreconditionError("spectral_measure: embedded elements fail to commute");
      if ((eu * ev - embedded[static_cast<size_t>(group.compose(u, v))]).norm() > 1e-8)
        throw PreconditionError("spectral_measure: embedding is not a representation");
    }

  // Atoms of A from a generic self-adjoint element.
  num::Rng rng(seed ^ 0x5bd1e995u);
  Mat h = Mat::Zero(d, d);
  for (const Mat& b : a.basis()) {
    Cplx c(rng.gauss(), rng.gauss());
    h += c * b + std::conj(c) * b.adjoint();
  }
  h = 0.5 * (h + h.adjoint());
  num::HermEig e = num::eig_hermitian(h);
  const double spread = std::max(e.values[d - 1] - e.values[0], 1.0);
  auto clusters = num::cluster_values(e.values, 1e-6, spread);

  SpectralMeasure out;
  out.dim = d;
  for (auto [lo, hi] : clusters) {
    Mat proj = Mat::Zero(d, d);
    for (Index i = lo; i < hi; ++i) proj += e.vectors.col(i) * e.vectors.col(i).adjoint();
    if ((proj * proj - proj).norm() > 1e-8 || !a.contains(proj, 1e-7))
      throw AmbiguityError("spectral_measure: atom clustering ambiguous at tolerance");

    // Eigenvalue of each embedded unitary on the atom.
    const double atom_rank = proj.trace().real();
    std::vector<Cplx> values(static_cast<size_t>(group.order()));
    for (int u = 0; u < group.order(); ++u) {
      Cplx lambda = (proj * embedded[static_cast<size_t>(u)]).trace() / atom_rank;
      if (std::abs(std::abs(lambda) - 1.0) > 1e-8)
        throw PreconditionError("spectral_measure: atom eigenvalue is off the unit circle");
      if ((embedded[static_cast<size_t>(u)] * proj - lambda * proj).norm() > 1e-7)
        throw AmbiguityError("spectral_measure: embedded unitary is not scalar on an atom");
      values[static_cast<size_t>(u)] = lambda;
    }
    int chi = dual.find_character(
        [&](int u) { return values[static_cast<size_t>(u)]; }, 1e-7);
    if (chi < 0)
      throw PreconditionError("spectral_measure: atom eigenvalues do not form a character");
    out.atoms.push_back(SpectralAtom{std::move(proj), chi});
  }

  Mat ref = Mat::Zero(d, d);
  for (Index i = 0; i < d; ++i) ref(i, i) = static_cast<double>(i + 1) / static_cast<double>(d);
  std::sort(out.atoms.begin(), out.atoms.end(), [&](const SpectralAtom& x, const SpectralAtom& y) {
    if (x.character != y.character) return x.character < y.character;
    return (x.projection * ref).trace().real() < (y.projection * ref).trace().real();
  });

  out.injective = true;
  for (size_t i = 0; i + 1 < out.atoms.size(); ++i)
    if (out.atoms[i].character == out.atoms[i + 1].character) out.injective = false;
  return out;
}

Mat coupling_estar_v(const SpectralMeasure& e, const DualGroup& dual) {
  const Index n = dual.size();
  Mat c = Mat::Zero(e.dim * n, e.dim * n);
  for (const SpectralAtom& a : e.atoms) {
    if (a.character < 0 || a.character >= n)
      throw PreconditionError("coupling_estar_v: atom character not found in the dual");
    c += num::kron(a.projection, dual.left_translation(a.character));
  }
  return c;
}

Mat coupling_ew(const SpectralMeasure& e, const FiniteAbelianGroup& group,
                const DualGroup& dual) {
  const Index n = group.order();
  Mat c = Mat::Zero(e.dim * n, e.dim * n);
  for (int u = 0; u < n; ++u) {
    Mat euu = Mat::Zero(n, n);
    euu(u, u) = 1.0;
    c += num::kron(e.embedded_unitary(dual, u).adjoint().eval(), euu);
  }
  return c;
}

}  // namespace takdual::kt

#include "takdual/vna.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace takdual::vna {

using num::AmbiguityError;
using num::CVec;
using num::PreconditionError;
using num::RVec;

void BlockInvariant::canonicalize() {
  std::sort(blocks.begin(), blocks.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second > b.second;
  });
}

bool BlockInvariant::abstract_equal(const BlockInvariant& other) const {
  if (blocks.size() != other.blocks.size()) return false;
  for (size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].first != other.blocks[i].first) return false;
  return true;
}

bool BlockInvariant::spatial_equal(const BlockInvariant& other) const {
  return blocks == other.blocks;
}

int BlockInvariant::ambient_dim() const {
  int d = 0;
  for (auto& [n, m] : blocks) d += n * m;
  return d;
}

int BlockInvariant::linear_dim() const {
  int d = 0;
  for (auto& [n, m] : blocks) d += n * n;
  return d;
}

std::string BlockInvariant::to_string() const {
  std::ostringstream os;
  os << "{";
  for (size_t i = 0; i < blocks.size(); ++i) {
    if (i) os << ",";
    os << "(" << blocks[i].first << "," << blocks[i].second << ")";
  }
  os << "}";
  return os.str();
}

OperatorAlgebra::OperatorAlgebra(Index dim, std::vector<Mat> basis,
                                 std::vector<Mat> generators)
    : dim_(dim), basis_(std::move(basis)), generators_(std::move(generators)) {
  Mat cols(dim_ * dim_, static_cast<Index>(basis_.size()));
  for (size_t i = 0; i < basis_.size(); ++i)
    cols.col(static_cast<Index>(i)) = num::to_vec(basis_[i]);
  subspace_ = MatSubspace::from_basis_columns(std::move(cols), dim_);
  if (generators_.empty()) generators_ = basis_;
}

OperatorAlgebra OperatorAlgebra::from_span(const std::vector<Mat>& span, Index dim,
                                           double tol, std::vector<Mat> generators) {
  MatSubspace s = MatSubspace::from_span(span, tol);
  return OperatorAlgebra(dim, s.basis_mats(), std::move(generators));
}

bool OperatorAlgebra::is_unital(double tol) const {
  return contains(Mat::Identity(dim_, dim_), tol);
}

bool OperatorAlgebra::is_selfadjoint_closed(double tol) const {
  for (const Mat& b : basis_)
    if (!contains(b.adjoint(), tol)) return false;
  return true;
}

bool OperatorAlgebra::is_product_closed(double tol, int samples) const {
  const size_t m = basis_.size();
  if (m * m <= 128) {
    for (const Mat& x : basis_)
      for (const Mat& y : basis_)
        if (!contains(x * y, tol)) return false;
    return true;
  }
  num::Rng rng(12345);
  for (int s = 0; s < samples; ++s) {
    Mat x = Mat::Zero(dim_, dim_), y = Mat::Zero(dim_, dim_);
    for (const Mat& b : basis_) {
      x += num::Cplx(rng.gauss(), rng.gauss()) * b;
      y += num::Cplx(rng.gauss(), rng.gauss()) * b;
    }
    x /= std::max(x.norm(), 1e-300);
    y /= std::max(y.norm(), 1e-300);
    if (!contains(x * y, tol)) return false;
  }
  return true;
}

bool OperatorAlgebra::is_abelian(double tol) const {
  for (size_t i = 0; i < basis_.size(); ++i)
    for (size_t j = i + 1; j < basis_.size(); ++j)
      if ((basis_[i] * basis_[j] - basis_[j] * basis_[i]).norm() > tol) return false;
  return true;
}

OperatorAlgebra OperatorAlgebra::full(Index d) {
  std::vector<Mat> basis;
  basis.reserve(static_cast<size_t>(d * d));
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j) {
      Mat e = Mat::Zero(d, d);
      e(i, j) = 1.0;
      basis.push_back(e);
    }
  std::vector<Mat> gens;
  if (d == 1) {
    gens = {Mat::Identity(1, 1)};
  } else {
    Mat shift = Mat::Zero(d, d);          // cyclic shift
    for (Index i = 0; i < d; ++i) shift((i + 1) % d, i) = 1.0;
    Mat e01 = Mat::Zero(d, d);
    e01(0, 1) = 1.0;
    gens = {shift, e01};
  }
  return OperatorAlgebra(d, std::move(basis), std::move(gens));
}

OperatorAlgebra OperatorAlgebra::diagonal(Index d) {
  std::vector<Mat> basis;
  for (Index i = 0; i < d; ++i) {
    Mat e = Mat::Zero(d, d);
    e(i, i) = 1.0;
    basis.push_back(e);
  }
  std::vector<Mat> gens = basis;
  return OperatorAlgebra(d, std::move(basis), std::move(gens));
}

OperatorAlgebra OperatorAlgebra::scalars(Index d) {
  std::vector<Mat> basis{Mat::Identity(d, d) / std::sqrt(static_cast<double>(d))};
  return OperatorAlgebra(d, std::move(basis), {Mat::Identity(d, d)});
}

OperatorAlgebra OperatorAlgebra::from_blocks(
    const std::vector<std::pair<int, int>>& blocks) {
  Index d = 0;
  for (auto& [n, m] : blocks) d += static_cast<Index>(n) * m;
  std::vector<Mat> basis;
  Index offset = 0;
  for (auto& [n, m] : blocks) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        // matrix unit e_ij replicated across the m spatial copies
        Mat e = Mat::Zero(d, d);
        for (int c = 0; c < m; ++c)
          e(offset + static_cast<Index>(c) * n + i, offset + static_cast<Index>(c) * n + j) =
              1.0 / std::sqrt(static_cast<double>(m));
        basis.push_back(e);
      }
    offset += static_cast<Index>(n) * m;
  }
  return OperatorAlgebra(d, std::move(basis), {});
}

StateOnAlgebra StateOnAlgebra::from_density(Mat rho, double tol) {
  if (rho.rows() != rho.cols()) throw PreconditionError("state: density not square");
  if ((rho - rho.adjoint()).norm() > tol * std::max(1.0, rho.norm()))
    throw PreconditionError("state: density not Hermitian");
  num::HermEig e = num::eig_hermitian(rho);
  if (e.values.minCoeff() < -tol) throw PreconditionError("state: density not positive");
  if (std::abs(rho.trace().real() - 1.0) > 1e-6)
    throw PreconditionError("state: density not normalized");
  StateOnAlgebra s;
  s.rho_ = std::move(rho);
  return s;
}

StateOnAlgebra StateOnAlgebra::from_vector(const CVec& psi, double tol) {
  if (std::abs(psi.norm() - 1.0) > 1e-6)
    throw PreconditionError("state: vector not normalized");
  return from_density(psi * psi.adjoint(), tol);
}

StateOnAlgebra StateOnAlgebra::tracial(Index d) {
  StateOnAlgebra s;
  s.rho_ = Mat::Identity(d, d) / static_cast<double>(d);
  return s;
}

namespace {

// Reduced parametrisation of the centraliser of a generic Hermitian element
// T in the span of the generators: X commuting with every generator also
// commutes with T, so X is block diagonal over T's eigenspaces. The
// remaining commutation constraints are then imposed inside that (usually
// much smaller) parameter space. The reduction is exact whatever T is;
// genericity only buys speed.
struct CentralizerFrame {
  std::vector<Mat> cluster_bases;   // Q_k, d x m_k, jointly orthonormal
  std::vector<Index> offsets;       // start of vec(Y_k) in the parameter vector
  Index params = 0;

  Mat assemble(const num::CVec& y, Index d) const {
    Mat x = Mat::Zero(d, d);
    for (size_t k = 0; k < cluster_bases.size(); ++k) {
      const Mat& q = cluster_bases[k];
      const Index m = q.cols();
      Mat yk = num::from_vec(y.segment(offsets[k], m * m), m, m);
      x += q * yk * q.adjoint();
    }
    return x;
  }
};

CentralizerFrame build_frame(const std::vector<Mat>& gens, Index d,
                             std::uint64_t seed) {
  num::Rng rng(seed ^ 0xc0ffee);
  Mat t = Mat::Zero(d, d);
  for (const Mat& a : gens) {
    num::Cplx c(rng.gauss(), rng.gauss());
    t += c * a + std::conj(c) * a.adjoint();
  }
  t = 0.5 * (t + t.adjoint());
  num::HermEig e = num::eig_hermitian(t);
  const double scale = std::max(1.0, std::abs(e.values.cwiseAbs().maxCoeff()));
  auto clusters = num::cluster_values(e.values, 1e-8, scale);

  CentralizerFrame frame;
  for (auto [lo, hi] : clusters) {
    frame.cluster_bases.push_back(e.vectors.middleCols(lo, hi - lo));
    frame.offsets.push_back(frame.params);
    frame.params += (hi - lo) * (hi - lo);
  }
  return frame;
}

// Blocks B_kl = Q_k^dagger A Q_l of one generator in the frame.
std::vector<std::vector<Mat>> frame_blocks(const CentralizerFrame& frame, const Mat& a) {
  const size_t nc = frame.cluster_bases.size();
  std::vector<std::vector<Mat>> b(nc, std::vector<Mat>(nc));
  for (size_t k = 0; k < nc; ++k)
    for (size_t l = 0; l < nc; ++l)
      b[k][l] = frame.cluster_bases[k].adjoint() * a * frame.cluster_bases[l];
  return b;
}

// ||[A, X]||^2 for block-diagonal X, computed blockwise; exactly equal to the
// full matrix residual because the Q_k are orthonormal and complete.
double frame_residual_sq(const CentralizerFrame& frame,
                         const std::vector<std::vector<Mat>>& b,
                         const std::vector<Mat>& y_blocks) {
  double r2 = 0;
  const size_t nc = frame.cluster_bases.size();
  for (size_t k = 0; k < nc; ++k)
    for (size_t l = 0; l < nc; ++l) {
      double r = (b[k][l] * y_blocks[l] - y_blocks[k] * b[k][l]).norm();
      r2 += r * r;
    }
  return r2;
}

// Largest singular value of the full stacked commutation operator, i.e. the
// scale the relative tolerance refers to, estimated by power iteration on
// X -> sum_A [A^dagger, [A, X]].
double stacked_operator_norm(const std::vector<Mat>& gens, Index d) {
  num::Rng rng(0x517e);
  Mat x = rng.gaussian_matrix(d, d);
  x /= std::max(x.norm(), 1e-300);
  double lambda = 0;
  for (int it = 0; it < 40; ++it) {
    Mat y = Mat::Zero(d, d);
    for (const Mat& a : gens) {
      Mat c = a * x - x * a;
      y += a.adjoint() * c - c * a.adjoint();
    }
    lambda = y.norm();
    if (lambda < 1e-300) return 0.0;
    x = y / lambda;
  }
  return std::sqrt(lambda);
}

}  // namespace

OperatorAlgebra commutant(const std::vector<Mat>& generators, Index dim, double tol) {
  if (generators.empty()) throw PreconditionError("commutant: empty generator set");
  std::vector<Mat> gens;
  for (const Mat& g : generators) {
    if (g.rows() != dim || g.cols() != dim)
      throw PreconditionError("commutant: ambient dimension mismatch among generators");
    if (g.norm() < 1e-14) continue;
    gens.push_back(g);
    gens.push_back(g.adjoint());
  }
  if (gens.empty()) return OperatorAlgebra::full(dim);  // only zero generators
  double scale = 0;
  for (Mat& g : gens) scale = std::max(scale, g.norm());
  for (Mat& g : gens) g /= scale;

  CentralizerFrame frame = build_frame(gens, dim, 0);
  const size_t nc = frame.cluster_bases.size();
  std::vector<std::vector<std::vector<Mat>>> blocks;
  blocks.reserve(gens.size());
  for (const Mat& a : gens) blocks.push_back(frame_blocks(frame, a));

  // Quadratic form of the remaining constraints on the reduced parameters.
  Mat h = Mat::Zero(frame.params, frame.params);
  for (const auto& b : blocks) {
    for (size_t k = 0; k < nc; ++k)
      for (size_t l = 0; l < nc; ++l) {
        const Mat& bkl = b[k][l];
        const Index mk = frame.cluster_bases[k].cols();
        const Index ml = frame.cluster_bases[l].cols();
        const Index ok = frame.offsets[k], ol = frame.offsets[l];
        // || B Y_l - Y_k B ||^2 expands into four kron terms
        h.block(ol, ol, ml * ml, ml * ml) +=
            num::kron(Mat::Identity(ml, ml), (bkl.adjoint() * bkl).eval());
        h.block(ok, ok, mk * mk, mk * mk) +=
            num::kron(((bkl * bkl.adjoint()).transpose()).eval(), Mat::Identity(mk, mk));
        Mat cross = num::kron(bkl.transpose().eval(), bkl.adjoint().eval());
        h.block(ol, ok, ml * ml, mk * mk) -= cross;
        h.block(ok, ol, mk * mk, ml * ml) -= cross.adjoint();
      }
  }

  // Candidate split from the reduced spectrum, classified on honestly
  // computed commutator residuals (blockwise, exactly the matrix residual)
  // against the full-problem constraint scale. When h carries no information
  // the parameter unit vectors serve as candidates; the residual-based
  // classification below is the same either way.
  std::vector<num::CVec> candidates;
  std::vector<double> resids;
  double sigma_ref = stacked_operator_norm(gens, dim);
  const bool h_trivial = h.norm() <= 1e-12;
  num::HermEig h_eig;
  if (!h_trivial) h_eig = num::eig_hermitian(h);
  for (Index i = 0; i < frame.params; ++i) {
    num::CVec y = h_trivial ? num::CVec::Unit(frame.params, i)
                            : num::CVec(h_eig.vectors.col(i));
    std::vector<Mat> y_blocks;
    for (size_t k = 0; k < nc; ++k) {
      const Index m = frame.cluster_bases[k].cols();
      y_blocks.push_back(num::from_vec(y.segment(frame.offsets[k], m * m), m, m));
    }
    double r2 = 0;
    for (const auto& b : blocks) r2 += frame_residual_sq(frame, b, y_blocks);
    double r = std::sqrt(r2);
    sigma_ref = std::max(sigma_ref, r);
    candidates.push_back(std::move(y));
    resids.push_back(r);
  }

  std::vector<Mat> basis;
  if (sigma_ref <= 1e-10) {
    // All remaining constraints are vacuous at rounding level.
    for (const auto& y : candidates) basis.push_back(frame.assemble(y, dim));
  } else {
    // Residuals hugging the threshold from either side cannot be certified
    // at this tolerance.
    double worst_kept = 0.0;
    double best_rejected = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < candidates.size(); ++i) {
      if (resids[i] <= tol * sigma_ref) {
        worst_kept = std::max(worst_kept, resids[i]);
        basis.push_back(frame.assemble(candidates[i], dim));
      } else {
        best_rejected = std::min(best_rejected, resids[i]);
      }
    }
    if (best_rejected < 10.0 * tol * sigma_ref || worst_kept > tol * sigma_ref / 3.0)
      throw AmbiguityError("commutant: rank decision inside tolerance band");
  }
  return OperatorAlgebra(dim, std::move(basis), {});
}

Generated generate_with_commutant(const std::vector<Mat>& generators, Index dim,
                                  double tol, std::uint64_t seed) {
  std::vector<Mat> gens = generators;
  gens.push_back(Mat::Identity(dim, dim));
  OperatorAlgebra first = commutant(gens, dim, tol);

  // The commutant is an algebra, so a few generic self-adjoint elements of it
  // generate it; this keeps the second pass cheap when dim(first) is large.
  std::vector<Mat> second_gens;
  const Index m = first.linear_dim();
  if (m <= 8) {
    second_gens = first.basis();
  } else {
    num::Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (int k = 0; k < 3; ++k) {
      Mat x = Mat::Zero(dim, dim);
      for (const Mat& b : first.basis()) x += num::Cplx(rng.gauss(), rng.gauss()) * b;
      Mat hx = 0.5 * (x + x.adjoint());
      Mat ax = num::Cplx(0, 0.5) * (x - x.adjoint());
      second_gens.push_back(hx / std::max(hx.norm(), 1e-300));
      second_gens.push_back(ax / std::max(ax.norm(), 1e-300));
    }
    second_gens.push_back(Mat::Identity(dim, dim));
  }
  OperatorAlgebra second = commutant(second_gens, dim, tol);
  // Keep the original small generating set as the generator hint.
  OperatorAlgebra alg(dim, second.basis(), gens);

  // Consistency spot checks: the generators must land inside, and sampled
  // pairs from the two commutants must commute.
  for (const Mat& g : generators)
    if (!alg.contains(g, std::max(tol, 1e-7) * 100))
      throw AmbiguityError("generate: generator escaped its double commutant");
  num::Rng rng(seed ^ 0xabcdef12345ull);
  for (int k = 0; k < 8; ++k) {
    const Mat& x = alg.basis()[static_cast<size_t>(rng.uniform() * alg.basis().size())];
    const Mat& y =
        first.basis()[static_cast<size_t>(rng.uniform() * first.basis().size())];
    if ((x * y - y * x).norm() > std::max(tol, 1e-7) * 100)
      throw AmbiguityError("generate: double commutant fails to commute with commutant");
  }
  return Generated{std::move(alg), std::move(first)};
}

OperatorAlgebra generate(const std::vector<Mat>& generators, Index dim, double tol,
                         std::uint64_t seed) {
  Generated g = generate_with_commutant(generators, dim, tol, seed);
  OperatorAlgebra alg = std::move(g.algebra);
  return alg;
}

OperatorAlgebra center(const OperatorAlgebra& a, double tol) {
  OperatorAlgebra comm = commutant(a.generators(), a.dim(), tol);
  MatSubspace inter = a.subspace().intersect(comm.subspace(), tol);
  std::vector<Mat> basis = inter.basis_mats();
  if (basis.empty())
    throw AmbiguityError("center: intersection came out empty (algebra not unital?)");
  return OperatorAlgebra(a.dim(), std::move(basis), {});
}

BlockInvariant SectorDecomposition::invariant() const {
  BlockInvariant inv;
  for (const Sector& s : sectors) inv.blocks.emplace_back(s.block_size, s.multiplicity);
  inv.canonicalize();
  return inv;
}

SectorDecomposition sector_decompose(const OperatorAlgebra& a, double tol,
                                     std::uint64_t seed) {
  const Index d = a.dim();
  OperatorAlgebra z = center(a, tol);

  // Generic self-adjoint central element; its spectral projections are the
  // minimal central projections when the coefficients are generic.
  num::Rng rng(seed);
  Mat zc = Mat::Zero(d, d);
  for (const Mat& b : z.basis()) {
    num::Cplx c(rng.gauss(), rng.gauss());
    zc += c * b + std::conj(c) * b.adjoint();
  }
  zc = 0.5 * (zc + zc.adjoint());
  num::HermEig e = num::eig_hermitian(zc);
  const double spread = std::max(e.values[d - 1] - e.values[0], 1.0);
  auto clusters = num::cluster_values(e.values, 1e-6, spread);

  SectorDecomposition out;
  Mat sum_check = Mat::Zero(d, d);
  int total_linear_dim = 0;
  for (auto [lo, hi] : clusters) {
    Mat range = e.vectors.middleCols(lo, hi - lo);
    Mat proj = range * range.adjoint();
    // Validate the clustering honestly instead of trusting the gap heuristic.
    if ((proj * proj - proj).norm() > 1e-8 || !z.contains(proj, 1e-7))
      throw AmbiguityError("sector_decompose: eigenvalue clustering ambiguous at tolerance");
    sum_check += proj;

    // On the range of a minimal central projection the algebra is a factor
    // I_n with multiplicity m; the commutant of the compressed generators
    // has dimension m^2 and rank(z) = n m.
    const Index rank = hi - lo;
    std::vector<Mat> compressed_gens;
    for (const Mat& g : a.generators())
      compressed_gens.push_back(range.adjoint() * g * range);
    compressed_gens.push_back(Mat::Identity(rank, rank));
    OperatorAlgebra comp_comm = commutant(compressed_gens, rank, tol);
    const int mdim = static_cast<int>(comp_comm.linear_dim());
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mdim))));
    if (m * m != mdim || m == 0 || rank % m != 0)
      throw AmbiguityError("sector_decompose: compressed block is not a matrix algebra");
    const int n = static_cast<int>(rank) / m;
    total_linear_dim += n * n;
    out.sectors.push_back(Sector{proj, n, m});
  }
  if ((sum_check - Mat::Identity(d, d)).norm() > 1e-8)
    throw AmbiguityError("sector_decompose: central projections do not sum to identity");
  if (total_linear_dim != static_cast<int>(a.linear_dim()))
    throw AmbiguityError("sector_decompose: block dimensions do not add up");

  Mat ref = Mat::Zero(d, d);
  for (Index i = 0; i < d; ++i) ref(i, i) = static_cast<double>(i + 1) / static_cast<double>(d);
  std::sort(out.sectors.begin(), out.sectors.end(), [&](const Sector& s1, const Sector& s2) {
    if (s1.block_size != s2.block_size) return s1.block_size > s2.block_size;
    return (s1.central_projection * ref).trace().real() <
           (s2.central_projection * ref).trace().real();
  });
  return out;
}

bool is_masa(const OperatorAlgebra& a, const OperatorAlgebra& m, double tol) {
  if (!m.subspace().contains_subspace(a.subspace(), std::max(tol, 1e-8) * 10))
    throw PreconditionError("is_masa: A is not contained in M");
  OperatorAlgebra rel = commutant(a.generators(), a.dim(), tol);
  MatSubspace inter = rel.subspace().intersect(m.subspace(), tol);
  return inter.dim() == a.subspace().dim() &&
         inter.equals(a.subspace(), std::max(tol, 1e-8) * 10);
}

std::vector<double> qc_channel(const StateOnAlgebra& phi, const OperatorAlgebra& m,
                               double tol, std::uint64_t seed) {
  SectorDecomposition dec = sector_decompose(m, tol, seed);
  std::vector<double> mu;
  double total = 0;
  for (const Sector& s : dec.sectors) {
    double p = phi.value(s.central_projection).real();
    if (p < -1e-8) throw AmbiguityError("qc_channel: negative sector probability");
    mu.push_back(std::max(p, 0.0));
    total += mu.back();
  }
  if (std::abs(total - 1.0) > 1e-6)
    throw PreconditionError("qc_channel: state not normalized over sectors");
  return mu;
}

Mat central_support(const Mat& p, const OperatorAlgebra& a, double tol) {
  const Index d = a.dim();
  if (p.rows() != d || p.cols() != d)
    throw PreconditionError("central_support: dimension mismatch");
  if ((p * p - p).norm() > 1e-8 || (p - p.adjoint()).norm() > 1e-8)
    throw PreconditionError("central_support: P is not a projection");
  bool commutes = true;
  for (const Mat& b : a.basis())
    if ((p * b - b * p).norm() > std::max(tol, 1e-8) * 10 * std::max(1.0, b.norm()))
      commutes = false;
  if (!commutes && !a.contains(p, std::max(tol, 1e-8) * 10))
    throw PreconditionError("central_support: P is neither in A' nor in A");

  // Smallest (A v A')-invariant subspace containing range P; its projection
  // is the smallest central projection dominating P.
  OperatorAlgebra aprime = commutant(a.generators(), d, tol);
  num::HermEig e = num::eig_hermitian(p);
  Mat span(d, d);
  Index cols = 0;
  for (Index i = 0; i < d; ++i)
    if (e.values[i] > 0.5) span.col(cols++) = e.vectors.col(i);
  span.conservativeResize(d, cols);
  span = num::orthonormal_columns(span, 1e-10);
  for (;;) {
    std::vector<Mat> actions;
    for (const Mat& b : a.basis()) actions.push_back(b);
    for (const Mat& b : aprime.basis()) actions.push_back(b);
    Mat grown(d, span.cols() * (static_cast<Index>(actions.size()) + 1));
    grown.leftCols(span.cols()) = span;
    Index c = span.cols();
    for (const Mat& b : actions)
      for (Index i = 0; i < span.cols(); ++i) grown.col(c++) = b * span.col(i);
    Mat next = num::orthonormal_columns(grown, 1e-10);
    if (next.cols() == span.cols()) break;
    span = std::move(next);
  }
  return span * span.adjoint();
}

}  // namespace takdual::vna

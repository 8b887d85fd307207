#pragma once

// Matrix *-algebra engine: generated von Neumann algebras via double
// commutant, centers, sector decompositions, MASA tests and the q->c channel.

#include "takdual/num.hpp"

#include <optional>
#include <string>
#include <vector>

namespace takdual::vna {

using num::Cplx;
using num::Index;
using num::Mat;
using num::MatSubspace;

// Multiset of (block size n_k, spatial multiplicity m_k). Abstract
// isomorphism of finite-dimensional von Neumann algebras is equality of the
// block-size multisets; multiplicities describe only the spatial action.
struct BlockInvariant {
  std::vector<std::pair<int, int>> blocks;  // sorted: n desc, then m desc

  void canonicalize();
  bool abstract_equal(const BlockInvariant& other) const;
  bool spatial_equal(const BlockInvariant& other) const;
  int ambient_dim() const;     // sum n_k * m_k
  int linear_dim() const;      // sum n_k^2
  std::string to_string() const;
};

// A unital *-closed subspace of d x d matrices carried by an orthonormal
// basis (Hilbert-Schmidt inner product). `generators` keeps a small
// generating set when one is known; it is what commutant computations use.
class OperatorAlgebra {
 public:
  OperatorAlgebra() = default;
  OperatorAlgebra(Index dim, std::vector<Mat> basis, std::vector<Mat> generators);

  Index dim() const { return dim_; }
  Index linear_dim() const { return static_cast<Index>(basis_.size()); }
  const std::vector<Mat>& basis() const { return basis_; }
  const std::vector<Mat>& generators() const { return generators_; }
  const MatSubspace& subspace() const { return subspace_; }

  bool contains(const Mat& x, double tol) const { return subspace_.contains(x, tol); }
  Mat project(const Mat& x) const { return subspace_.project(x); }

  bool is_unital(double tol) const;
  bool is_selfadjoint_closed(double tol) const;
  // Multiplicative closure probed on generator products and random pairs.
  bool is_product_closed(double tol, int samples = 8) const;
  bool is_abelian(double tol) const;

  // Orthonormalizes an arbitrary spanning set (the plain constructor assumes
  // the basis is already orthonormal).
  static OperatorAlgebra from_span(const std::vector<Mat>& span, Index dim, double tol,
                                   std::vector<Mat> generators = {});

  static OperatorAlgebra full(Index d);
  static OperatorAlgebra diagonal(Index d);
  static OperatorAlgebra scalars(Index d);
  // Block-diagonal sum of full matrix algebras, each block repeated with the
  // given spatial multiplicity.
  static OperatorAlgebra from_blocks(const std::vector<std::pair<int, int>>& blocks);

 private:
  Index dim_ = 0;
  std::vector<Mat> basis_;
  std::vector<Mat> generators_;
  MatSubspace subspace_;
};

struct Sector {
  Mat central_projection;
  int block_size = 0;
  int multiplicity = 0;
};

struct SectorDecomposition {
  std::vector<Sector> sectors;
  BlockInvariant invariant() const;
};

// State given by a density matrix on the ambient space.
class StateOnAlgebra {
 public:
  static StateOnAlgebra from_density(Mat rho, double tol);
  static StateOnAlgebra from_vector(const num::CVec& psi, double tol);
  static StateOnAlgebra tracial(Index d);

  const Mat& density() const { return rho_; }
  Cplx value(const Mat& x) const { return (rho_ * x).trace(); }

 private:
  Mat rho_;
};

// {X : [X, A] = [X, A^dagger] = 0 for all generators A}. Unital and
// *-closed by construction.
OperatorAlgebra commutant(const std::vector<Mat>& generators, Index dim, double tol);

// Double commutant; also returns the (first) commutant since callers
// usually need both.
struct Generated {
  OperatorAlgebra algebra;
  OperatorAlgebra commutant;
};
Generated generate_with_commutant(const std::vector<Mat>& generators, Index dim,
                                  double tol, std::uint64_t seed = 0);
OperatorAlgebra generate(const std::vector<Mat>& generators, Index dim, double tol,
                         std::uint64_t seed = 0);

OperatorAlgebra center(const OperatorAlgebra& a, double tol);

SectorDecomposition sector_decompose(const OperatorAlgebra& a, double tol,
                                     std::uint64_t seed = 0);

// A' intersect M == A, with A contained in M as a precondition.
bool is_masa(const OperatorAlgebra& a, const OperatorAlgebra& m, double tol);

// mu_k = phi(z_k) over the sector decomposition of m.
std::vector<double> qc_channel(const StateOnAlgebra& phi, const OperatorAlgebra& m,
                               double tol, std::uint64_t seed = 0);

// Smallest central projection z with z P = P, for P a projection commuting
// with A; computed as the projection onto span{a xi : a in A, xi in range P}.
Mat central_support(const Mat& p, const OperatorAlgebra& a, double tol);

}  // namespace takdual::vna

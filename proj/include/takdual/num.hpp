#pragma once

// Dense complex linear algebra shared by every module: Hilbert-Schmidt
// geometry on matrix spaces, Hermitian spectral calculus, nullspaces with
// residual-verified rank decisions, and seeded random draws.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace takdual::num {

using Cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kDefaultTol = 1e-9;

// Thrown when a rank / clustering decision falls inside the tolerance band
// and cannot be made honestly.
struct AmbiguityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Mat kron(const Mat& a, const Mat& b);

// <a,b> = tr(a^dagger b)
Cplx hs_inner(const Mat& a, const Mat& b);
double hs_norm(const Mat& a);

// Column-major flattening consistent with vec(AXB) = (B^T (x) A) vec(X).
CVec to_vec(const Mat& a);
Mat from_vec(const CVec& v, Index rows, Index cols);

// Operator that acts as `op` on tensor slots (a,b) of a three-fold product
// with dimensions dims[0..2], identity on the remaining slot. Slots are
// zero-based and a < b.
Mat embed_two_slots(const Mat& op, const std::array<Index, 3>& dims, int a, int b);

// Swap unitary H1 (x) H2 -> H2 (x) H1.
Mat flip_operator(Index d1, Index d2);

// Partial trace over the second factor of H1 (x) H2.
Mat partial_trace_second(const Mat& x, Index d1, Index d2);

struct HermEig {
  RVec values;   // ascending
  Mat vectors;   // orthonormal columns
};
HermEig eig_hermitian(const Mat& h);

// f applied to a Hermitian matrix through its eigendecomposition.
Mat herm_function(const Mat& h, const std::function<Cplx(double)>& f);

// h^{it} for positive definite Hermitian h.
Mat herm_imaginary_power(const Mat& h, double t);
Mat herm_sqrt(const Mat& h);
Mat herm_inverse(const Mat& h);

// Orthonormal basis for the column span; rank decided at tol relative to the
// largest column scale (rank-revealing QR).
Mat orthonormal_columns(const Mat& vectors, double tol);

// Orthonormal basis of {x : c x = 0}. Rank decisions are made on the
// spectrum of c^dagger c and then verified against the true residuals
// ||c v|| <= tol * sigma_max; an unverifiable split raises AmbiguityError.
Mat nullspace(const Mat& c, double tol);

// Groups the (sorted ascending) values into clusters separated by gaps
// larger than gap * scale; returns [start, end) index pairs.
std::vector<std::pair<Index, Index>> cluster_values(const RVec& sorted, double gap,
                                                    double scale);

// A linear subspace of d x d matrices with an orthonormal basis under the
// Hilbert-Schmidt inner product.
class MatSubspace {
 public:
  MatSubspace() = default;
  static MatSubspace from_span(const std::vector<Mat>& mats, double tol);
  static MatSubspace from_basis_columns(Mat basis, Index ambient_dim);

  Index dim() const { return basis_.cols(); }
  Index ambient_dim() const { return ambient_; }
  const Mat& basis_columns() const { return basis_; }
  std::vector<Mat> basis_mats() const;

  Mat project(const Mat& x) const;
  double residual(const Mat& x) const;  // ||x - P x|| relative to ||x||
  bool contains(const Mat& x, double tol) const;
  bool contains_subspace(const MatSubspace& other, double tol) const;
  bool equals(const MatSubspace& other, double tol) const;

  MatSubspace intersect(const MatSubspace& other, double tol) const;

 private:
  Mat basis_;       // d^2 x m, orthonormal columns of vectorised matrices
  Index ambient_ = 0;
};

// Deterministic random source; every stochastic choice in the workbench is
// drawn from one of these with an explicit seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double gauss();
  double uniform();  // [0,1)
  Mat gaussian_matrix(Index rows, Index cols);
  Mat hermitian(Index d);
  Mat unitary(Index d);
  Mat density(Index d, double floor = 1e-3);  // faithful by construction
  CVec state_vector(Index d);

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

std::string format_complex(const Cplx& z);

}  // namespace takdual::num

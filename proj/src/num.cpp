#include "takdual/num.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace takdual::num {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Cplx hs_inner(const Mat& a, const Mat& b) { return (a.adjoint() * b).trace(); }

double hs_norm(const Mat& a) { return a.norm(); }

CVec to_vec(const Mat& a) {
  return Eigen::Map<const CVec>(a.data(), a.size());
}

Mat from_vec(const CVec& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw std::invalid_argument("from_vec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

Mat embed_two_slots(const Mat& op, const std::array<Index, 3>& dims, int a, int b) {
  const Index d0 = dims[0], d1 = dims[1], d2 = dims[2];
  const Index total = d0 * d1 * d2;
  if (a == 0 && b == 1) return kron(op, Mat::Identity(d2, d2));
  if (a == 1 && b == 2) return kron(Mat::Identity(d0, d0), op);
  if (a != 0 || b != 2) throw std::invalid_argument("embed_two_slots: bad slots");
  // slots (0,2): op[(i,k),(i',k')] placed with slot 1 untouched
  Mat out = Mat::Zero(total, total);
  for (Index i = 0; i < d0; ++i)
    for (Index k = 0; k < d2; ++k)
      for (Index ip = 0; ip < d0; ++ip)
        for (Index kp = 0; kp < d2; ++kp) {
          const Cplx v = op(i * d2 + k, ip * d2 + kp);
          if (v == Cplx(0, 0)) continue;
          for (Index j = 0; j < d1; ++j)
            out((i * d1 + j) * d2 + k, (ip * d1 + j) * d2 + kp) = v;
        }
  return out;
}

Mat flip_operator(Index d1, Index d2) {
  Mat s = Mat::Zero(d1 * d2, d1 * d2);
  for (Index i = 0; i < d1; ++i)
    for (Index j = 0; j < d2; ++j) s(j * d1 + i, i * d2 + j) = 1.0;
  return s;
}

Mat partial_trace_second(const Mat& x, Index d1, Index d2) {
  Mat out = Mat::Zero(d1, d1);
  for (Index i = 0; i < d1; ++i)
    for (Index j = 0; j < d1; ++j) {
      Cplx s = 0;
      for (Index k = 0; k < d2; ++k) s += x(i * d2 + k, j * d2 + k);
      out(i, j) = s;
    }
  return out;
}

HermEig eig_hermitian(const Mat& h) {
  Mat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> solver(sym);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: solver failed");
  return HermEig{solver.eigenvalues(), solver.eigenvectors()};
}

Mat herm_function(const Mat& h, const std::function<Cplx(double)>& f) {
  HermEig e = eig_hermitian(h);
  CVec fv(e.values.size());
  for (Index i = 0; i < e.values.size(); ++i) fv[i] = f(e.values[i]);
  return e.vectors * fv.asDiagonal() * e.vectors.adjoint();
}

Mat herm_imaginary_power(const Mat& h, double t) {
  return herm_function(h, [t](double x) {
    if (x <= 0.0) throw std::domain_error("herm_imaginary_power: non-positive eigenvalue");
    return std::exp(Cplx(0.0, t * std::log(x)));
  });
}

Mat herm_sqrt(const Mat& h) {
  return herm_function(h, [](double x) { return Cplx(std::sqrt(std::max(x, 0.0)), 0.0); });
}

Mat herm_inverse(const Mat& h) {
  return herm_function(h, [](double x) {
    if (x == 0.0) throw std::domain_error("herm_inverse: singular");
    return Cplx(1.0 / x, 0.0);
  });
}

Mat orthonormal_columns(const Mat& vectors, double tol) {
  if (vectors.cols() == 0) return Mat(vectors.rows(), 0);
  Eigen::ColPivHouseholderQR<Mat> qr(vectors);
  qr.setThreshold(tol);
  const Index r = qr.rank();
  if (r == 0) return Mat(vectors.rows(), 0);
  Mat q = qr.householderQ() * Mat::Identity(vectors.rows(), r);
  return q;
}

Mat nullspace(const Mat& c, double tol) {
  const Index n = c.cols();
  if (c.rows() == 0 || c.cwiseAbs().maxCoeff() == 0.0) return Mat::Identity(n, n);
  Mat h = c.adjoint() * c;
  HermEig e = eig_hermitian(h);

  // Eigenvalues of c^dagger c only propose the split; the decision is made on
  // honestly computed residuals ||c v||, whose maximum also provides the
  // reference scale (the squared spectrum amplifies rounding noise).
  std::vector<double> resids(static_cast<size_t>(n));
  double sigma_ref = 0.0;
  for (Index i = 0; i < n; ++i) {
    resids[static_cast<size_t>(i)] = (c * e.vectors.col(i)).norm();
    sigma_ref = std::max(sigma_ref, resids[static_cast<size_t>(i)]);
  }
  // Callers scale constraints to O(1); residuals at rounding level across the
  // board mean the constraints are vacuous.
  if (sigma_ref <= 1e-12) return Mat::Identity(n, n);

  std::vector<Index> keep;
  double worst_kept = 0.0;
  double best_rejected = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < n; ++i) {
    if (resids[static_cast<size_t>(i)] <= tol * sigma_ref) {
      worst_kept = std::max(worst_kept, resids[static_cast<size_t>(i)]);
      keep.push_back(i);
    } else {
      best_rejected = std::min(best_rejected, resids[static_cast<size_t>(i)]);
    }
  }
  // A vector hugging the threshold from either side means the rank is not
  // decidable at this tolerance.
  if (best_rejected < 10.0 * tol * sigma_ref || worst_kept > tol * sigma_ref / 3.0)
    throw AmbiguityError("nullspace: residual spectrum has no gap at tolerance");
  Mat out(n, static_cast<Index>(keep.size()));
  for (Index k = 0; k < out.cols(); ++k) out.col(k) = e.vectors.col(keep[static_cast<size_t>(k)]);
  return out;
}

std::vector<std::pair<Index, Index>> cluster_values(const RVec& sorted, double gap,
                                                    double scale) {
  std::vector<std::pair<Index, Index>> clusters;
  const Index n = sorted.size();
  if (n == 0) return clusters;
  Index start = 0;
  for (Index i = 1; i < n; ++i) {
    if (sorted[i] - sorted[i - 1] > gap * scale) {
      clusters.emplace_back(start, i);
      start = i;
    }
  }
  clusters.emplace_back(start, n);
  return clusters;
}

MatSubspace MatSubspace::from_span(const std::vector<Mat>& mats, double tol) {
  if (mats.empty()) throw std::invalid_argument("MatSubspace: empty span");
  const Index d = mats.front().rows();
  Mat cols(d * d, static_cast<Index>(mats.size()));
  for (size_t i = 0; i < mats.size(); ++i) {
    if (mats[i].rows() != d || mats[i].cols() != d)
      throw std::invalid_argument("MatSubspace: dimension mismatch");
    double nrm = mats[i].norm();
    cols.col(static_cast<Index>(i)) = nrm > 0 ? (to_vec(mats[i]) / nrm).eval() : to_vec(mats[i]);
  }
  MatSubspace s;
  s.basis_ = orthonormal_columns(cols, tol);
  s.ambient_ = d;
  return s;
}

MatSubspace MatSubspace::from_basis_columns(Mat basis, Index ambient_dim) {
  MatSubspace s;
  s.basis_ = std::move(basis);
  s.ambient_ = ambient_dim;
  return s;
}

std::vector<Mat> MatSubspace::basis_mats() const {
  std::vector<Mat> out;
  out.reserve(static_cast<size_t>(basis_.cols()));
  for (Index i = 0; i < basis_.cols(); ++i)
    out.push_back(from_vec(basis_.col(i), ambient_, ambient_));
  return out;
}

Mat MatSubspace::project(const Mat& x) const {
  CVec v = to_vec(x);
  CVec p = basis_ * (basis_.adjoint() * v);
  return from_vec(p, ambient_, ambient_);
}

double MatSubspace::residual(const Mat& x) const {
  const double nrm = x.norm();
  if (nrm == 0.0) return 0.0;
  return (x - project(x)).norm() / nrm;
}

bool MatSubspace::contains(const Mat& x, double tol) const {
  return residual(x) <= tol;
}

bool MatSubspace::contains_subspace(const MatSubspace& other, double tol) const {
  for (Index i = 0; i < other.basis_.cols(); ++i) {
    CVec v = other.basis_.col(i);
    if ((v - basis_ * (basis_.adjoint() * v)).norm() > tol) return false;
  }
  return true;
}

bool MatSubspace::equals(const MatSubspace& other, double tol) const {
  return dim() == other.dim() && contains_subspace(other, tol) &&
         other.contains_subspace(*this, tol);
}

MatSubspace MatSubspace::intersect(const MatSubspace& other, double tol) const {
  if (ambient_ != other.ambient_)
    throw std::invalid_argument("intersect: ambient dimension mismatch");
  if (dim() == 0 || other.dim() == 0)
    return from_basis_columns(Mat(basis_.rows(), 0), ambient_);
  // x = B c lies in the other subspace iff (I - Q Q^dagger) B c = 0.
  Mat constraint = basis_ - other.basis_ * (other.basis_.adjoint() * basis_);
  Mat coeffs = nullspace(constraint, tol);
  Mat cols = basis_ * coeffs;
  return from_basis_columns(orthonormal_columns(cols, tol), ambient_);
}

double Rng::gauss() { return normal_(gen_); }
double Rng::uniform() { return unif_(gen_); }

Mat Rng::gaussian_matrix(Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Cplx(gauss(), gauss());
  return m;
}

Mat Rng::hermitian(Index d) {
  Mat g = gaussian_matrix(d, d);
  return 0.5 * (g + g.adjoint());
}

Mat Rng::unitary(Index d) {
  Mat g = gaussian_matrix(d, d);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * Mat::Identity(d, d);
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < d; ++i) {
    Cplx rii = r(i, i);
    q.col(i) *= (rii == Cplx(0, 0)) ? Cplx(1, 0) : rii / std::abs(rii);
  }
  return q;
}

Mat Rng::density(Index d, double floor) {
  Mat g = gaussian_matrix(d, d);
  Mat rho = g * g.adjoint();
  rho += floor * rho.trace().real() / static_cast<double>(d) * Mat::Identity(d, d);
  rho /= rho.trace().real();
  return rho;
}

CVec Rng::state_vector(Index d) {
  CVec v(d);
  for (Index i = 0; i < d; ++i) v[i] = Cplx(gauss(), gauss());
  v.normalize();
  return v;
}

std::string format_complex(const Cplx& z) {
  std::ostringstream os;
  os << z.real();
  if (z.imag() >= 0)
    os << "+" << z.imag() << "i";
  else
    os << z.imag() << "i";
  return os.str();
}

}  // namespace takdual::num

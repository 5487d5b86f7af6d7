#pragma once

// Numerical differential-geometry substrate: central finite differences,
// Jacobi-Lie brackets on Euclidean charts and on SO(n) in left
// trivialization, SPD solves and so(n) utilities.

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "chaplygin/errors.hpp"

namespace chaplygin {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

using VectorMap = std::function<Vec(const Vec&)>;
using ScalarMap = std::function<double(const Vec&)>;

namespace numkit {

/// Passing this as a step selects the default step for the point.
inline constexpr double kAutoStep = 0.0;

/// cbrt(eps) * max(1, |x|_inf); balances truncation and roundoff for one
/// level of central differencing.
double default_fd_step(const Vec& x);

/// eps^(1/4) * max(1, |x|_inf); for differencing quantities that are
/// themselves finite-difference results.
double nested_fd_step(const Vec& x);

/// Vector field on an open box of R^n.
struct EuclideanVectorField {
  VectorMap evaluate;
  Index dim = 0;

  Vec operator()(const Vec& q) const { return evaluate(q); }
};

/// Vector field on SO(n) written as g -> g^{-1} X(g) in so(n).
struct LeftTrivializedField {
  std::function<Mat(const Mat&)> evaluate;
  Index n = 0;

  Mat operator()(const Mat& g) const { return evaluate(g); }
};

/// u ^ v = u v^T - v u^T.
Mat wedge(const Vec& u, const Vec& v);

/// Ordered basis {e_a ^ e_b : a < b} of so(n) with flatten/unflatten maps
/// to R^{n(n-1)/2}. The basis is orthonormal for the Killing pairing.
class SkewBasis {
 public:
  explicit SkewBasis(Index n);

  Index n() const noexcept { return n_; }
  Index size() const noexcept { return static_cast<Index>(pairs_.size()); }
  std::pair<Index, Index> pair(Index k) const { return pairs_.at(static_cast<std::size_t>(k)); }
  Mat element(Index k) const;

  /// Coordinates of xi in the wedge basis (reads the strict upper triangle).
  Vec flatten(const Mat& xi) const;
  Mat unflatten(const Vec& coords) const;

 private:
  Index n_;
  std::vector<std::pair<Index, Index>> pairs_;
};

/// Central-difference Jacobian, entry (i,j) = (f_i(x+h e_j) - f_i(x-h e_j)) / 2h.
/// Throws NonFiniteEvaluation naming the perturbed coordinate.
Mat fd_jacobian(const VectorMap& f, const Vec& x, double h = kAutoStep);

Vec fd_gradient(const ScalarMap& f, const Vec& x, double h = kAutoStep);

/// [X, Y](q) = DY(q) X(q) - DX(q) Y(q).
Vec lie_bracket_euclidean(const EuclideanVectorField& X, const EuclideanVectorField& Y,
                          const Vec& q, double h = kAutoStep);

/// Left-trivialized bracket D_X Y(g) - D_Y X(g) + [X(g), Y(g)], where
/// D_X Y(g) = d/dt Y(g exp(t X(g))) at t = 0 by central differences.
Mat lie_bracket_left_trivialized(const LeftTrivializedField& X, const LeftTrivializedField& Y,
                                 const Mat& g, double h = kAutoStep);

/// (xi, eta)_k = -1/2 tr(xi eta).
double killing_pairing(const Mat& xi, const Mat& eta);

/// Solves M x = b for symmetric positive definite M through a Cholesky
/// factorization. Throws NotPositiveDefinite with the failing pivot.
Vec spd_solve(const Mat& M, const Vec& b, double symmetry_tol = 1e-10);
Mat spd_solve(const Mat& M, const Mat& B, double symmetry_tol = 1e-10);
Mat spd_inverse(const Mat& M, double symmetry_tol = 1e-10);

/// Matrix exponential (scaling and squaring with Pade approximants).
Mat expm(const Mat& A);

/// max |g^T g - I|.
double orthogonality_defect(const Mat& g);

/// Throws InvalidGroupElement unless g is orthogonal within tol with det +1.
void require_rotation(const Mat& g, double tol = 1e-10);

/// Nearest orthogonal matrix U V^T from the SVD g = U S V^T.
Mat polar_project(const Mat& g);

/// Polar projection applied only when the orthogonality defect exceeds threshold.
Mat reorthonormalize(const Mat& g, double threshold = 1e-9);

}  // namespace numkit
}  // namespace chaplygin

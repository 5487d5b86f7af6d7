#include "chaplygin/numkit.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <unsupported/Eigen/MatrixFunctions>

namespace chaplygin::numkit {

namespace {

bool all_finite(const Vec& v) { return v.allFinite(); }

double scale_of(const Vec& x) {
  return x.size() == 0 ? 1.0 : std::max(1.0, x.cwiseAbs().maxCoeff());
}

void check_skew_square(const Mat& m, const char* who) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch(std::string(who) + ": matrix is not square");
  }
}

// Cholesky factor with the failing pivot reported.
Mat cholesky_lower(const Mat& M, double symmetry_tol) {
  if (M.rows() != M.cols()) {
    throw DimensionMismatch("spd_solve: matrix is not square");
  }
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > symmetry_tol * scale) {
    throw NotPositiveDefinite("spd_solve: matrix is not symmetric", -1);
  }
  const Index n = M.rows();
  Mat L = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = M(j, j) - L.row(j).head(j).squaredNorm();
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NotPositiveDefinite("spd_solve: non-positive pivot " + std::to_string(j), j);
    }
    L(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      L(i, j) = (M(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / L(j, j);
    }
  }
  return L;
}

}  // namespace

double default_fd_step(const Vec& x) {
  static const double base = std::cbrt(std::numeric_limits<double>::epsilon());
  return base * scale_of(x);
}

double nested_fd_step(const Vec& x) {
  static const double base = std::pow(std::numeric_limits<double>::epsilon(), 0.25);
  return base * scale_of(x);
}

Mat wedge(const Vec& u, const Vec& v) {
  if (u.size() != v.size()) {
    throw DimensionMismatch("wedge: vectors of different length");
  }
  return u * v.transpose() - v * u.transpose();
}

SkewBasis::SkewBasis(Index n) : n_(n) {
  if (n < 2) {
    throw InvalidParams("SkewBasis: n must be at least 2");
  }
  for (Index a = 0; a < n; ++a) {
    for (Index b = a + 1; b < n; ++b) {
      pairs_.emplace_back(a, b);
    }
  }
}

Mat SkewBasis::element(Index k) const {
  const auto [a, b] = pair(k);
  Mat e = Mat::Zero(n_, n_);
  e(a, b) = 1.0;
  e(b, a) = -1.0;
  return e;
}

Vec SkewBasis::flatten(const Mat& xi) const {
  if (xi.rows() != n_ || xi.cols() != n_) {
    throw DimensionMismatch("SkewBasis::flatten: wrong matrix size");
  }
  Vec out(size());
  for (Index k = 0; k < size(); ++k) {
    const auto [a, b] = pairs_[static_cast<std::size_t>(k)];
    out(k) = xi(a, b);
  }
  return out;
}

Mat SkewBasis::unflatten(const Vec& coords) const {
  if (coords.size() != size()) {
    throw DimensionMismatch("SkewBasis::unflatten: wrong coordinate count");
  }
  Mat xi = Mat::Zero(n_, n_);
  for (Index k = 0; k < size(); ++k) {
    const auto [a, b] = pairs_[static_cast<std::size_t>(k)];
    xi(a, b) = coords(k);
    xi(b, a) = -coords(k);
  }
  return xi;
}

Mat fd_jacobian(const VectorMap& f, const Vec& x, double h) {
  if (h == kAutoStep) h = default_fd_step(x);
  if (!(h > 0.0)) throw InvalidParams("fd_jacobian: step must be positive");
  const Index n = x.size();
  Mat J;
  Vec xp = x;
  for (Index j = 0; j < n; ++j) {
    xp(j) = x(j) + h;
    const Vec fp = f(xp);
    xp(j) = x(j) - h;
    const Vec fm = f(xp);
    xp(j) = x(j);
    if (!all_finite(fp) || !all_finite(fm)) {
      throw NonFiniteEvaluation("fd_jacobian: non-finite value when perturbing coordinate " +
                                    std::to_string(j),
                                j);
    }
    if (j == 0) J.resize(fp.size(), n);
    if (fp.size() != J.rows() || fm.size() != J.rows()) {
      throw DimensionMismatch("fd_jacobian: output dimension changed between evaluations");
    }
    J.col(j) = (fp - fm) / (2.0 * h);
  }
  if (n == 0) J.resize(f(x).size(), 0);
  return J;
}

Vec fd_gradient(const ScalarMap& f, const Vec& x, double h) {
  if (h == kAutoStep) h = default_fd_step(x);
  Vec g(x.size());
  Vec xp = x;
  for (Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + h;
    const double fp = f(xp);
    xp(j) = x(j) - h;
    const double fm = f(xp);
    xp(j) = x(j);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteEvaluation(
          "fd_gradient: non-finite value when perturbing coordinate " + std::to_string(j), j);
    }
    g(j) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vec lie_bracket_euclidean(const EuclideanVectorField& X, const EuclideanVectorField& Y,
                          const Vec& q, double h) {
  if (X.dim != Y.dim || q.size() != X.dim) {
    throw DimensionMismatch("lie_bracket_euclidean: field/point dimensions differ");
  }
  if (h == kAutoStep) h = default_fd_step(q);
  const Vec xq = X(q);
  const Vec yq = Y(q);
  if (!all_finite(xq) || !all_finite(yq)) {
    throw NonFiniteEvaluation("lie_bracket_euclidean: non-finite field value at base point", -1);
  }
  // Directional derivatives along the other field: same result as the full
  // Jacobian product, with 4 evaluations instead of 4n.
  const Vec dy_x = (Y(q + h * xq) - Y(q - h * xq)) / (2.0 * h);
  const Vec dx_y = (X(q + h * yq) - X(q - h * yq)) / (2.0 * h);
  Vec out = dy_x - dx_y;
  if (!all_finite(out)) {
    throw NonFiniteEvaluation("lie_bracket_euclidean: non-finite derivative", -1);
  }
  return out;
}

Mat lie_bracket_left_trivialized(const LeftTrivializedField& X, const LeftTrivializedField& Y,
                                 const Mat& g, double h) {
  require_rotation(g);
  if (X.n != Y.n || g.rows() != X.n) {
    throw DimensionMismatch("lie_bracket_left_trivialized: dimension mismatch");
  }
  if (h == kAutoStep) h = default_fd_step(Vec::Ones(1));
  const Mat xg = X(g);
  const Mat yg = Y(g);
  const Mat ep_x = expm(h * xg);
  const Mat ep_y = expm(h * yg);
  // exp(-hA) = exp(hA)^T for skew A.
  const Mat dx_y = (Y(g * ep_x) - Y(g * ep_x.transpose())) / (2.0 * h);
  const Mat dy_x = (X(g * ep_y) - X(g * ep_y.transpose())) / (2.0 * h);
  Mat out = dx_y - dy_x + (xg * yg - yg * xg);
  if (!out.allFinite()) {
    throw NonFiniteEvaluation("lie_bracket_left_trivialized: non-finite result", -1);
  }
  return out;
}

double killing_pairing(const Mat& xi, const Mat& eta) {
  check_skew_square(xi, "killing_pairing");
  check_skew_square(eta, "killing_pairing");
  if (xi.rows() != eta.rows()) {
    throw DimensionMismatch("killing_pairing: matrices of different size");
  }
  // tr(xi eta) = sum_ab xi_ab eta_ba
  return -0.5 * xi.cwiseProduct(eta.transpose()).sum();
}

Vec spd_solve(const Mat& M, const Vec& b, double symmetry_tol) {
  if (b.size() != M.rows()) throw DimensionMismatch("spd_solve: rhs length mismatch");
  const Mat L = cholesky_lower(M, symmetry_tol);
  const auto tri = L.triangularView<Eigen::Lower>();
  return tri.transpose().solve(tri.solve(b));
}

Mat spd_solve(const Mat& M, const Mat& B, double symmetry_tol) {
  if (B.rows() != M.rows()) throw DimensionMismatch("spd_solve: rhs row mismatch");
  const Mat L = cholesky_lower(M, symmetry_tol);
  const auto tri = L.triangularView<Eigen::Lower>();
  return tri.transpose().solve(tri.solve(B));
}

Mat spd_inverse(const Mat& M, double symmetry_tol) {
  Mat inv = spd_solve(M, Mat(Mat::Identity(M.rows(), M.cols())), symmetry_tol);
  return 0.5 * (inv + inv.transpose());
}

Mat expm(const Mat& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("expm: matrix is not square");
  return A.exp();
}

double orthogonality_defect(const Mat& g) {
  if (g.rows() != g.cols()) return std::numeric_limits<double>::infinity();
  return (g.transpose() * g - Mat::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

void require_rotation(const Mat& g, double tol) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw InvalidGroupElement("group element is not a square matrix");
  }
  const double defect = orthogonality_defect(g);
  if (!(defect <= tol)) {
    throw InvalidGroupElement("group element not orthogonal (defect " + std::to_string(defect) +
                              ")");
  }
  if (g.determinant() <= 0.0) {
    throw InvalidGroupElement("group element has negative determinant");
  }
}

Mat polar_project(const Mat& g) {
  Eigen::JacobiSVD<Mat> svd(g, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().transpose();
}

Mat reorthonormalize(const Mat& g, double threshold) {
  return orthogonality_defect(g) > threshold ? polar_project(g) : g;
}

}  // namespace chaplygin::numkit

#include "invlr/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "invlr/error.hpp"
#include "invlr/tolerances.hpp"

namespace invlr {

namespace {

// Index of the largest |entry| in a column; ties go to the lowest index.
Eigen::Index argmax_abs(const Eigen::Ref<const Vector>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (std::abs(v(i)) > std::abs(v(best))) best = i;
  }
  return best;
}

}  // namespace

SvdFactors svd(const Matrix& m) {
  if (!all_finite(m)) {
    throw Error(ErrorCode::NoConvergence, "svd input has non-finite entries");
  }
  SvdFactors f;
  if (m.size() == 0) {
    f.U = Matrix::Identity(m.rows(), m.rows());
    f.V = Matrix::Identity(m.cols(), m.cols());
    f.sigma = Vector(0);
    return f;
  }
  // One-sided Jacobi with a fixed sweep order: deterministic, and always
  // converges for finite input.
  Eigen::JacobiSVD<Matrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "Jacobi SVD did not converge");
  }
  f.U = solver.matrixU();
  f.V = solver.matrixV();
  f.sigma = solver.singularValues();

  const Eigen::Index k = f.sigma.size();
  for (Eigen::Index j = 0; j < f.U.cols(); ++j) {
    if (f.U(argmax_abs(f.U.col(j)), j) < 0.0) {
      f.U.col(j) *= -1.0;
      if (j < k) f.V.col(j) *= -1.0;
    }
  }
  for (Eigen::Index j = k; j < f.V.cols(); ++j) {
    if (f.V(argmax_abs(f.V.col(j)), j) < 0.0) f.V.col(j) *= -1.0;
  }
  return f;
}

double rank_threshold(const Vector& sigma, Eigen::Index rows, Eigen::Index cols) {
  if (sigma.size() == 0) return 0.0;
  return tol::kRank * sigma(0) * static_cast<double>(std::max(rows, cols));
}

Eigen::Index numerical_rank(const SvdFactors& f, Eigen::Index rows, Eigen::Index cols) {
  const double cut = rank_threshold(f.sigma, rows, cols);
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < f.sigma.size(); ++i) {
    if (f.sigma(i) > cut) ++rank;
  }
  return rank;
}

Eigen::Index numerical_rank(const Matrix& m) { return numerical_rank(svd(m), m.rows(), m.cols()); }

Matrix best_rank_r(const SvdFactors& f, Eigen::Index r) {
  if (r < 0 || r > f.sigma.size()) {
    throw Error(ErrorCode::RankOutOfRange,
                "r = " + std::to_string(r) + " outside [0, " + std::to_string(f.sigma.size()) + "]");
  }
  return f.U.leftCols(r) * f.sigma.head(r).asDiagonal() * f.V.leftCols(r).transpose();
}

Matrix best_rank_r(const Matrix& m, Eigen::Index r) {
  const Eigen::Index k = std::min(m.rows(), m.cols());
  if (r < 0 || r > k) {
    throw Error(ErrorCode::RankOutOfRange,
                "r = " + std::to_string(r) + " outside [0, " + std::to_string(k) + "]");
  }
  return best_rank_r(svd(m), r);
}

PdRoot pd_root(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NonSquare, "pd_sqrt needs a square matrix");
  const double scale = std::max(1.0, m.norm());
  if ((m - m.transpose()).norm() > tol::kSymmetry * scale) {
    throw Error(ErrorCode::NotSymmetric, "pd_sqrt input is not symmetric");
  }
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolver failed");
  }
  const Vector& lam = eig.eigenvalues();  // ascending
  const double lmax = lam.size() ? lam(lam.size() - 1) : 0.0;
  const double lmin = lam.size() ? lam(0) : 0.0;
  if (lam.size() && (lmax <= 0.0 || lmin <= tol::kPositiveDefinite * lmax)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(lmin) + " vs largest " + std::to_string(lmax));
  }
  const Matrix& q = eig.eigenvectors();
  const Vector s = lam.cwiseSqrt();
  PdRoot out;
  out.root = q * s.asDiagonal() * q.transpose();
  out.inv_root = q * s.cwiseInverse().asDiagonal() * q.transpose();
  // exact symmetry
  out.root = 0.5 * (out.root + out.root.transpose()).eval();
  out.inv_root = 0.5 * (out.inv_root + out.inv_root.transpose()).eval();
  out.min_eigenvalue = lmin;
  out.max_eigenvalue = lmax;
  return out;
}

Matrix pd_sqrt(const Matrix& m) { return pd_root(m).root; }

Matrix pinv(const Matrix& m) {
  if (m.size() == 0) return Matrix::Zero(m.cols(), m.rows());
  const SvdFactors f = svd(m);
  const Eigen::Index rank = numerical_rank(f, m.rows(), m.cols());
  return f.V.leftCols(rank) * f.sigma.head(rank).cwiseInverse().asDiagonal() *
         f.U.leftCols(rank).transpose();
}

Matrix left_null_projector(const Matrix& g) {
  const Eigen::Index d0 = g.rows();
  if (g.cols() == 0) return Matrix::Identity(d0, d0);
  const SvdFactors f = svd(g);
  const Eigen::Index rank = numerical_rank(f, g.rows(), g.cols());
  // G G^+ = U_r U_r^T; form the complement from the same factors so that the
  // projector is symmetric to rounding.
  const auto ur = f.U.leftCols(rank);
  Matrix proj = Matrix::Identity(d0, d0) - ur * ur.transpose();
  return 0.5 * (proj + proj.transpose());
}

Matrix left_null_basis(const Matrix& g) {
  const Eigen::Index d0 = g.rows();
  if (g.cols() == 0) return Matrix::Identity(d0, d0);
  const SvdFactors f = svd(g);
  const Eigen::Index rank = numerical_rank(f, g.rows(), g.cols());
  Matrix basis = f.U.rightCols(d0 - rank).transpose();
  for (Eigen::Index i = 0; i < basis.rows(); ++i) {
    const double cut = 1e-12 * basis.row(i).cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < basis.cols(); ++j) {
      if (std::abs(basis(i, j)) > cut) {
        if (basis(i, j) < 0.0) basis.row(i) *= -1.0;
        break;
      }
    }
  }
  return basis;
}

Vector vec(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw Error(ErrorCode::ShapeMismatch, "unvec size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace invlr

#include "jpsa/init_embed.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace jpsa {

void canonicalize_signs(Matrix& rows) {
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::Index arg = 0;
    double best = -1;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
      if (std::abs(rows(i, j)) > best) {
        best = std::abs(rows(i, j));
        arg = j;
      }
    }
    if (best > 0 && rows(i, arg) < 0) rows.row(i) *= -1.0;
  }
}

int numerical_rank(const Matrix& x) {
  if (x.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(x);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0) return 0;
  const double tol = 1e-10 * s(0);
  return static_cast<int>((s.array() > tol).count());
}

LinearEmbedding pca_fit(const Matrix& x, int d_out) {
  const Eigen::Index d_in = x.rows();
  const Eigen::Index n = x.cols();
  if (d_out < 1 || d_out > std::min(d_in, n)) {
    throw InputError("pca_fit: d_out = " + std::to_string(d_out) + " must lie in [1, min(d_in, n) = " +
                     std::to_string(std::min(d_in, n)) + "]");
  }
  LinearEmbedding emb;
  emb.kind = EmbeddingKind::pca;
  emb.mean = x.rowwise().mean();
  const Matrix centered = x.colwise() - emb.mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericalError("pca_fit: eigensolver failed");
  emb.projection.resize(d_out, d_in);
  for (int i = 0; i < d_out; ++i) {
    const Eigen::Index src = d_in - 1 - i;
    emb.projection.row(i) = eig.eigenvectors().col(src).transpose();
    emb.eigenvalues.push_back(eig.eigenvalues()(src));
  }
  canonicalize_signs(emb.projection);
  return emb;
}

LinearEmbedding lpp_fit(const Matrix& x, const SparseMatrix& lap, const Vector& deg, int d_out) {
  const Eigen::Index d_in = x.rows();
  const Eigen::Index n = x.cols();
  if (lap.rows() != n || lap.cols() != n || deg.size() != n) {
    throw InputError("lpp_fit: graph size " + std::to_string(lap.rows()) + " does not match " + std::to_string(n) +
                     " samples");
  }
  if ((deg.array() <= 0).any()) throw InputError("lpp_fit: degree matrix must be positive on the diagonal");
  if (d_out < 1 || d_out > d_in) {
    throw InputError("lpp_fit: d_out = " + std::to_string(d_out) + " must lie in [1, " + std::to_string(d_in) + "]");
  }
  const int rank = numerical_rank(x);
  if (d_out > rank) {
    throw InputError("lpp_fit: d_out = " + std::to_string(d_out) + " exceeds the numerical rank of the data; " +
                     "achievable rank is " + std::to_string(rank));
  }

  const Matrix xl = x * lap;  // d_in x n
  Matrix a = xl * x.transpose();
  Matrix b = x * deg.asDiagonal() * x.transpose();
  // Symmetrize away rounding so the solver sees exactly self-adjoint input.
  a = 0.5 * (a + a.transpose()).eval();
  b = 0.5 * (b + b.transpose()).eval();
  b.diagonal().array() += kLppRidge;

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(a, b, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (eig.info() != Eigen::Success) throw NumericalError("lpp_fit: generalized eigensolver failed");

  LinearEmbedding emb;
  emb.kind = EmbeddingKind::lpp;
  emb.mean = Vector::Zero(d_in);
  emb.projection.resize(d_out, d_in);
  for (int i = 0; i < d_out; ++i) {
    Vector v = eig.eigenvectors().col(i);
    v /= v.norm();
    emb.projection.row(i) = v.transpose();
    emb.eigenvalues.push_back(eig.eigenvalues()(i));
  }
  canonicalize_signs(emb.projection);
  return emb;
}

}  // namespace jpsa

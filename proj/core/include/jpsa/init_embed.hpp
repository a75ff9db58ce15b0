#ifndef JPSA_INIT_EMBED_HPP
#define JPSA_INIT_EMBED_HPP

#include "jpsa/data_model.hpp"
#include "jpsa/graph.hpp"

#include <vector>

namespace jpsa {

enum class EmbeddingKind { pca, lpp };

struct LinearEmbedding {
  Matrix projection;  // d_out x d_in, one component per row
  EmbeddingKind kind = EmbeddingKind::pca;
  std::vector<double> eigenvalues;
  Vector mean;  // training mean (PCA only; zero for LPP)

  Matrix transform(const Matrix& x) const { return projection * x; }
};

// Rows are made sign-unique: the largest-magnitude entry of each row is
// positive (first such entry on ties).
void canonicalize_signs(Matrix& rows);

/// Top-d_out eigenvectors of the (1/n) mean-centered covariance, largest
/// eigenvalue first.
LinearEmbedding pca_fit(const Matrix& x, int d_out);

/// Locality preserving projections: the d_out smallest generalized
/// eigenpairs of X L X^T a = lambda (X D X^T + 1e-8 I) a. Rows are scaled to
/// unit Euclidean norm. Throws InputError when d_out exceeds the numerical
/// rank of X.
LinearEmbedding lpp_fit(const Matrix& x, const SparseMatrix& lap, const Vector& deg, int d_out);

inline constexpr double kLppRidge = 1e-8;

// Numerical rank of x (singular values above 1e-10 * largest).
int numerical_rank(const Matrix& x);

}  // namespace jpsa

#endif  // JPSA_INIT_EMBED_HPP

#ifndef JPSA_GRAPH_HPP
#define JPSA_GRAPH_HPP

#include "jpsa/data_model.hpp"
#include "jpsa/superpixel.hpp"

#include <Eigen/Sparse>

#include <span>
#include <string>

namespace jpsa {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Spatial-spectral graph over n samples and its fused 2n x 2n form:
/// wf = [[wp, wa], [wa, wsp]], lf = diag(wf 1) - wf.
struct GraphBundle {
  SparseMatrix wp;
  SparseMatrix wsp;
  SparseMatrix wa;
  SparseMatrix wf;
  Vector degree;
  SparseMatrix lf;
};

// Heat-kernel weights exp(-|xi-xj|^2 / 2 sigma^2) on the k Euclidean nearest
// neighbors of each column (ties to the lower index), symmetrized by
// elementwise max, zero diagonal.
SparseMatrix knn_heat_graph(const Matrix& feats, int k, double sigma);

// 1 where two columns belong to the same segment, diagonal included.
SparseMatrix alignment_graph(std::span<const int> segment_of_column);
SparseMatrix alignment_graph(const Segmentation& seg);

SparseMatrix laplacian(const SparseMatrix& w);
Vector degrees(const SparseMatrix& w);

GraphBundle assemble_fused(const SparseMatrix& wp, const SparseMatrix& wsp, const SparseMatrix& wa);

// Convenience: pixel kNN graph, stream kNN graph and alignment graph over
// the same columns, fused.
GraphBundle build_fused_graph(const Matrix& pixels, const Matrix& stream, std::span<const int> segment_of_column,
                              int k, double sigma);

// "i j w" lines sorted by (i, j); w in shortest round-trip form.
std::string dump_coo(const SparseMatrix& w);

}  // namespace jpsa

#endif  // JPSA_GRAPH_HPP

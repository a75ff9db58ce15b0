#include "jpsa/graph.hpp"

#include "jpsa/io_formats.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <vector>

namespace jpsa {

namespace {

double max_asymmetry(const SparseMatrix& w) {
  SparseMatrix diff = SparseMatrix(w.transpose()) - w;
  double worst = 0;
  for (int k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

void require_square_symmetric(const SparseMatrix& w, const char* name) {
  if (w.rows() != w.cols()) throw InputError(std::string(name) + " is not square");
  const double asym = max_asymmetry(w);
  if (asym > 1e-10) {
    throw InputError(std::string(name) + " is not symmetric (max |w - w^T| = " + io::format_real(asym) + ")");
  }
}

}  // namespace

SparseMatrix knn_heat_graph(const Matrix& feats, int k, double sigma) {
  const Eigen::Index n = feats.cols();
  if (k < 1) throw InputError("knn_heat_graph: k must be >= 1");
  if (k >= n) {
    throw InputError("knn_heat_graph: k = " + std::to_string(k) + " must be smaller than the sample count " +
                     std::to_string(n));
  }
  if (!(sigma > 0)) throw InputError("knn_heat_graph: sigma must be > 0");
  const double inv = 1.0 / (2.0 * sigma * sigma);

  // Keyed by (row, col) so the max-symmetrization is a single pass.
  std::map<std::pair<Eigen::Index, Eigen::Index>, double> weights;
  std::vector<Eigen::Index> order;
  std::vector<double> dist(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      dist[j] = (feats.col(i) - feats.col(j)).squaredNorm();
    }
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });
    for (int t = 0; t < k; ++t) {
      const Eigen::Index j = order[t];
      const double w = std::exp(-dist[j] * inv);
      auto key_a = std::make_pair(i, j);
      auto key_b = std::make_pair(j, i);
      weights[key_a] = std::max(weights[key_a], w);
      weights[key_b] = std::max(weights[key_b], w);
    }
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(weights.size());
  for (const auto& [ij, w] : weights) trip.emplace_back(ij.first, ij.second, w);
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  out.prune(0.0);  // kernel underflow
  return out;
}

SparseMatrix alignment_graph(std::span<const int> segment_of_column) {
  const auto n = static_cast<Eigen::Index>(segment_of_column.size());
  std::map<int, std::vector<Eigen::Index>> members;
  for (Eigen::Index i = 0; i < n; ++i) members[segment_of_column[i]].push_back(i);
  std::vector<Eigen::Triplet<double>> trip;
  for (const auto& [seg, cols] : members) {
    for (auto i : cols) {
      for (auto j : cols) trip.emplace_back(i, j, 1.0);
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

SparseMatrix alignment_graph(const Segmentation& seg) { return alignment_graph(std::span<const int>(seg.labels)); }

Vector degrees(const SparseMatrix& w) {
  Vector d = Vector::Zero(w.rows());
  for (int k = 0; k < w.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(w, k); it; ++it) d(it.row()) += it.value();
  }
  return d;
}

SparseMatrix laplacian(const SparseMatrix& w) {
  if (w.rows() != w.cols()) throw InputError("laplacian: weight matrix is not square");
  for (int k = 0; k < w.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(w, k); it; ++it) {
      if (it.value() < 0) {
        throw InputError("laplacian: negative weight at (" + std::to_string(it.row()) + ", " +
                         std::to_string(it.col()) + ")");
      }
    }
  }
  const Vector d = degrees(w);
  SparseMatrix deg(w.rows(), w.cols());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index i = 0; i < d.size(); ++i) trip.emplace_back(i, i, d(i));
  deg.setFromTriplets(trip.begin(), trip.end());
  SparseMatrix lap = deg - w;
  lap.prune(0.0);
  return lap;
}

GraphBundle assemble_fused(const SparseMatrix& wp, const SparseMatrix& wsp, const SparseMatrix& wa) {
  require_square_symmetric(wp, "wp");
  require_square_symmetric(wsp, "wsp");
  require_square_symmetric(wa, "wa");
  const Eigen::Index n = wp.rows();
  if (wsp.rows() != n || wa.rows() != n) throw InputError("assemble_fused: blocks must share one size");

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(wp.nonZeros() + wsp.nonZeros() + 2 * wa.nonZeros()));
  auto place = [&](const SparseMatrix& block, Eigen::Index r0, Eigen::Index c0) {
    for (int k = 0; k < block.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(block, k); it; ++it) {
        if (it.value() < 0) throw InputError("assemble_fused: negative weight");
        trip.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
      }
    }
  };
  place(wp, 0, 0);
  place(wa, 0, n);
  place(wa, n, 0);
  place(wsp, n, n);

  GraphBundle g;
  g.wp = wp;
  g.wsp = wsp;
  g.wa = wa;
  g.wf.resize(2 * n, 2 * n);
  g.wf.setFromTriplets(trip.begin(), trip.end());
  g.degree = degrees(g.wf);
  g.lf = laplacian(g.wf);
  return g;
}

GraphBundle build_fused_graph(const Matrix& pixels, const Matrix& stream, std::span<const int> segment_of_column,
                              int k, double sigma) {
  if (pixels.cols() != stream.cols() || static_cast<std::size_t>(pixels.cols()) != segment_of_column.size()) {
    throw InputError("build_fused_graph: pixel, stream and segment columns must agree");
  }
  return assemble_fused(knn_heat_graph(pixels, k, sigma), knn_heat_graph(stream, k, sigma),
                        alignment_graph(segment_of_column));
}

std::string dump_coo(const SparseMatrix& w) {
  std::vector<std::tuple<Eigen::Index, Eigen::Index, double>> entries;
  for (int k = 0; k < w.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(w, k); it; ++it) entries.emplace_back(it.row(), it.col(), it.value());
  }
  std::sort(entries.begin(), entries.end());
  std::string out;
  for (const auto& [i, j, v] : entries) {
    out += std::to_string(i) + " " + std::to_string(j) + " " + io::format_real(v) + "\n";
  }
  return out;
}

}  // namespace jpsa

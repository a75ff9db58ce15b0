#ifndef JPSA_PROJECTION_STACK_HPP
#define JPSA_PROJECTION_STACK_HPP

#include "jpsa/data_model.hpp"

#include <optional>
#include <vector>

namespace jpsa {

/// Ordered layer projections Θ_1..Θ_m (Θ_l is d_l x d_{l-1}) plus the
/// optional regression matrix P (classes x d_m), absent before fine-tuning.
struct ProjectionStack {
  std::vector<Matrix> thetas;
  std::optional<Matrix> p;

  int layers() const { return static_cast<int>(thetas.size()); }
  Eigen::Index input_dim() const { return thetas.empty() ? 0 : thetas.front().cols(); }
  Eigen::Index output_dim() const { return thetas.empty() ? 0 : thetas.back().rows(); }

  // Throws InputError when shapes do not chain or an entry is non-finite.
  void validate() const;

  // Θ_hi ... Θ_lo (1-based, inclusive); identity of size d_{lo-1} when hi < lo.
  Matrix compose(int lo, int hi) const;
};

}  // namespace jpsa

#endif  // JPSA_PROJECTION_STACK_HPP

#pragma once

#include "sgbp/table.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sgbp {

struct Factor {
  std::string id;
  FactorTable table;  ///< scope is the factor's sorted variable list

  const Scope& variables() const { return table.scope(); }
};

/// Raw description of a discrete MRF, p(x) ∝ ∏_a φ_a(x_a).
struct ModelSpec {
  int num_variables = 0;
  int alphabet_size = 2;
  std::vector<Factor> factors;
};

/// Validated, immutable MRF with per-variable factor adjacency.
class Model {
 public:
  int num_variables() const { return n_; }
  int alphabet_size() const { return d_; }
  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(int index) const { return factors_.at(static_cast<std::size_t>(index)); }
  /// Factor index for an id, or -1.
  int factor_index(const std::string& id) const;
  /// Indices of the factors that touch variable v.
  const std::vector<int>& factors_of(int v) const { return adjacency_.at(static_cast<std::size_t>(v)); }

  ModelSpec spec() const { return {n_, d_, factors_}; }

  friend Model build_model(ModelSpec spec);

 private:
  int n_ = 0;
  int d_ = 2;
  std::vector<Factor> factors_;
  std::vector<std::vector<int>> adjacency_;
};

/// Validates a spec and precomputes adjacency. Throws std::invalid_argument on
/// out-of-range variables, unsorted or duplicated scopes, duplicate ids, wrong
/// table lengths or negative entries.
Model build_model(ModelSpec spec);

struct PottsParams {
  int grid_rows = 3;
  int grid_cols = 3;
  double gamma = 0.1;
  double mu = 0.1;
  double sigma = 0.1;
  std::uint64_t seed = 0;
};

void validate(const PottsParams& p);

/// Grid Potts model: ψ_uv(i,j) = 1 if i = j else γ on every grid edge, and
/// φ_u(0) = 1, φ_u(i) = μ + σY for i > 0 with an independent Y ~ U(-1, 1) per
/// (node, state) drawn from the counter-based stream keyed by (seed, node, state).
/// Variables are numbered row-major; unary ids are "phi_<v>", pairwise ids
/// "psi_<u>_<v>" with u < v.
ModelSpec make_potts(const PottsParams& params, int d);

}  // namespace sgbp

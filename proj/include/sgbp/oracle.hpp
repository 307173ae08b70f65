#pragma once

#include "sgbp/gbp.hpp"
#include "sgbp/model.hpp"
#include "sgbp/region_graph.hpp"

#include <vector>

// Ground truth by exhaustive enumeration. Everything here is deliberately
// written as plain nested loops over global assignments and shares no code
// path with the engines beyond the data types.
namespace sgbp::oracle {

struct ExactResult {
  double partition_function = 0.0;
  std::vector<FactorTable> marginals;  ///< one per requested subset, normalized
};

/// Enumerates all d^n assignments. Throws std::length_error when d^n > 1e8.
ExactResult exact_marginals(const Model& model, const std::vector<Scope>& subsets);

/// N(P,R) and D(P,R) recomputed from reachability searches on the raw edge list.
struct ReferenceEdgeSets {
  std::vector<int> numerator;
  std::vector<int> denominator;
};
ReferenceEdgeSets reference_edge_sets(const RegionGraph& graph, int edge);

/// Normalized m_{P→R}: for every x_R, Σ_{x_{P\R}} (Φ_P/Φ_R) ∏_N m / ∏_D m,
/// evaluated factor by factor at full assignments.
FactorTable reference_update(const MessageSet& messages, int edge, const RegionGraph& graph, const Model& model);

}  // namespace sgbp::oracle

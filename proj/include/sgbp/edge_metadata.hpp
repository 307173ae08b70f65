#pragma once

#include "sgbp/model.hpp"
#include "sgbp/region_graph.hpp"

#include <string_view>
#include <vector>

namespace sgbp {

/// How the stochastic update behaves on an edge.
enum class EdgeClass {
  independent,    ///< T_PR = ∅: the update ignores all messages (E1)
  deterministic,  ///< T_PR ≠ ∅ but (P\R) ∩ T_PR = ∅: deterministic mix (E2)
  stochastic,     ///< (P\R) ∩ T_PR ≠ ∅: sampled update (E3)
};

std::string_view to_string(EdgeClass c);

struct EdgeSets {
  std::vector<int> numerator;    ///< N(P,R), edge indices
  std::vector<int> denominator;  ///< D(P,R), edge indices
};

/// Everything the engines need to update m_{P→R}, precomputed once.
struct EdgeMetadata {
  int edge = 0;
  int parent = 0;
  int child = 0;
  EdgeSets sets;

  std::vector<int> quotient_factors;  ///< factors of P not in R
  FactorTable quotient;               ///< Φ_{P\R} over P′

  Scope parent_vars;   ///< P
  Scope child_vars;    ///< R
  Scope eliminated;    ///< P\R
  Scope t_scope;       ///< T_PR
  Scope sampled;       ///< (P\R) ∩ T_PR
  Scope free_vars;     ///< (P\R) \ T_PR
  Scope conditioning;  ///< T_PR \ (P\R), always ⊆ R
  Scope residual;      ///< P′ \ (P\R)

  EdgeClass edge_class = EdgeClass::stochastic;
  int eta = 0;   ///< η_PR
  int gain = 0;  ///< I_PR = |P| − η_PR (0 for E1/E2)
  bool reduces_complexity = false;
};

/// N(P,R) and D(P,R) from their defining predicates over the closures.
EdgeSets compute_edge_sets(const RegionGraph& graph, int edge);

/// Φ_{P\R} built symbolically as the product of P's factors missing from R.
FactorTable compute_quotient(const RegionGraph& graph, const Model& model, int edge);

/// Fills scopes, class, η, gain and the complexity verdict from edge sets
/// already stored in `meta`.
void classify_edge(const RegionGraph& graph, EdgeMetadata& meta);

EdgeMetadata analyze_edge(const RegionGraph& graph, const Model& model, int edge);
std::vector<EdgeMetadata> analyze_graph(const RegionGraph& graph, const Model& model);

/// Graph-level complexity summary.
struct ComplexitySummary {
  int a_max = 0;             ///< largest top region size, the GBP dominant exponent
  int sgbp_exponent = 0;     ///< dominant per-iteration exponent under SGBP
  int dominant_gain = 0;     ///< a_max − sgbp_exponent
};

/// Per-iteration cost exponent of one edge under SGBP: 0 for E1,
/// max(|T|, |R|) for E2, η for E3.
int sgbp_edge_exponent(const EdgeMetadata& meta);
ComplexitySummary summarize(const RegionGraph& graph, const std::vector<EdgeMetadata>& meta);

}  // namespace sgbp

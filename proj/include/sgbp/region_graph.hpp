#pragma once

#include "sgbp/model.hpp"
#include "sgbp/table.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sgbp {

/// Region as declared in a region file: factor membership by factor id.
struct RegionSpec {
  std::string id;
  std::vector<int> variables;
  std::vector<std::string> factors;
};

struct RegionGraphSpec {
  std::vector<RegionSpec> regions;
  std::vector<std::pair<std::string, std::string>> edges;  ///< (parent id, child id)
};

struct Region {
  std::string id;
  Scope variables;          ///< sorted
  std::vector<int> factors;  ///< sorted factor indices into the model
};

struct Edge {
  int parent = 0;
  int child = 0;
};

/// Validated region graph with parent/child lists and ancestor/descendant
/// closures. Regions and edges keep their declaration order; edge e is the
/// e-th entry of edges().
class RegionGraph {
 public:
  std::size_t num_regions() const { return regions_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Region>& regions() const { return regions_; }
  const Region& region(int r) const { return regions_.at(static_cast<std::size_t>(r)); }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_.at(static_cast<std::size_t>(e)); }

  int region_index(const std::string& id) const;
  /// Edge index of parent→child, or -1.
  int edge_index(int parent, int child) const;

  const std::vector<int>& parents(int r) const { return parents_[static_cast<std::size_t>(r)]; }
  const std::vector<int>& children(int r) const { return children_[static_cast<std::size_t>(r)]; }
  const std::vector<int>& ancestors(int r) const { return ancestors_[static_cast<std::size_t>(r)]; }
  const std::vector<int>& descendants(int r) const { return descendants_[static_cast<std::size_t>(r)]; }
  /// E(R) = {R} ∪ D(R), sorted.
  const std::vector<int>& closure(int r) const { return closure_[static_cast<std::size_t>(r)]; }
  bool in_closure(int of, int r) const { return in_closure_[static_cast<std::size_t>(of) * regions_.size() + static_cast<std::size_t>(r)]; }
  bool is_descendant(int of, int r) const { return of != r && in_closure(of, r); }

  /// Regions with no parents.
  const std::vector<int>& top_regions() const { return tops_; }
  bool is_top(int r) const { return parents(r).empty(); }
  /// Regions ordered so every parent precedes its children.
  const std::vector<int>& topological_order() const { return topo_; }
  /// Edge indices ordered by the topological position of their parent.
  std::vector<int> edges_top_down() const;

  std::string edge_label(int e) const { return region(edge(e).parent).id + "->" + region(edge(e).child).id; }

  friend RegionGraph build_region_graph(std::vector<Region> regions, std::vector<Edge> edges, const Model& model);

 private:
  std::vector<Region> regions_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> parents_, children_, ancestors_, descendants_, closure_;
  std::vector<char> in_closure_;
  std::vector<int> tops_, topo_;
};

/// Validates regions and edges against the model and computes all closures.
/// Throws std::invalid_argument naming the offending region or edge on a
/// factor-closure violation, a non-subset edge, a duplicate edge, or a cycle.
RegionGraph build_region_graph(std::vector<Region> regions, std::vector<Edge> edges, const Model& model);

/// Resolves ids of a RegionGraphSpec and builds the graph.
RegionGraph build_region_graph(const RegionGraphSpec& spec, const Model& model);

/// Φ_R: product of the region's factors broadcast onto its variables
/// (all-ones when the region holds no factors).
FactorTable region_potential(const Region& region, const Model& model);

/// Overlapping 2×2 clusters of a rows×cols grid as top regions, closed under
/// pairwise intersection; every region takes all model factors whose scope it
/// covers, and edges join each region to its maximal proper sub-regions. On a
/// 3×3 grid this yields tops {1245, 2356, 4578, 5689}, middles {25, 45, 56, 58}
/// and bottom {5} (1-based labels).
RegionGraphSpec make_grid_cluster_regions(int rows, int cols, const Model& model);

/// Bethe construction: one top region per factor of arity ≥ 2 (holding that
/// factor plus the unary factors of its variables) and one child region per
/// variable shared by two or more tops.
RegionGraphSpec make_bethe_regions(const Model& model);

/// Region label built from 1-based variable labels, e.g. {0,1,3,4} -> "1245".
/// Falls back to '_'-separated labels when any label has more than one digit.
std::string region_label(const Scope& variables);

}  // namespace sgbp

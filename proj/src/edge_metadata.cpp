#include "sgbp/edge_metadata.hpp"

#include <algorithm>
#include <stdexcept>

namespace sgbp {

std::string_view to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::independent: return "E1";
    case EdgeClass::deterministic: return "E2";
    case EdgeClass::stochastic: return "E3";
  }
  return "?";
}

EdgeSets compute_edge_sets(const RegionGraph& graph, int edge) {
  const Edge& pr = graph.edge(edge);
  const int p = pr.parent;
  const int r = pr.child;
  EdgeSets sets;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Edge& ij = graph.edges()[e];
    // N(P,R): I ∉ E(P), J ∈ E(P) \ E(R)
    if (!graph.in_closure(p, ij.parent) && graph.in_closure(p, ij.child) && !graph.in_closure(r, ij.child))
      sets.numerator.push_back(static_cast<int>(e));
    // D(P,R): I ∈ D(P) \ E(R), J ∈ E(R)
    if (graph.is_descendant(p, ij.parent) && !graph.in_closure(r, ij.parent) && graph.in_closure(r, ij.child))
      sets.denominator.push_back(static_cast<int>(e));
  }
  for (int e : sets.numerator)
    if (std::find(sets.denominator.begin(), sets.denominator.end(), e) != sets.denominator.end())
      throw std::logic_error("edge " + graph.edge_label(e) + " lies in both N and D of " + graph.edge_label(edge));
  return sets;
}

FactorTable compute_quotient(const RegionGraph& graph, const Model& model, int edge) {
  const Region& p = graph.region(graph.edge(edge).parent);
  const Region& r = graph.region(graph.edge(edge).child);
  std::vector<int> diff;
  std::set_difference(p.factors.begin(), p.factors.end(), r.factors.begin(), r.factors.end(), std::back_inserter(diff));
  Scope scope;
  for (int a : diff) scope = scope_union(scope, model.factor(a).variables());
  FactorTable q(scope, model.alphabet_size(), 1.0);
  for (int a : diff) q = pointwise(PointwiseOp::multiply, q, model.factor(a).table);
  return q;
}

void classify_edge(const RegionGraph& graph, EdgeMetadata& m) {
  const Edge& e = graph.edge(m.edge);
  m.parent = e.parent;
  m.child = e.child;
  m.parent_vars = graph.region(e.parent).variables;
  m.child_vars = graph.region(e.child).variables;
  m.eliminated = scope_difference(m.parent_vars, m.child_vars);

  m.t_scope.clear();
  for (int j : m.sets.numerator) m.t_scope = scope_union(m.t_scope, graph.region(graph.edge(j).child).variables);
  for (int j : m.sets.denominator) m.t_scope = scope_union(m.t_scope, graph.region(graph.edge(j).child).variables);
  if (!scope_includes(m.parent_vars, m.t_scope)) throw std::logic_error("T_PR escapes the parent region");

  m.sampled = scope_intersection(m.eliminated, m.t_scope);
  m.free_vars = scope_difference(m.eliminated, m.t_scope);
  m.conditioning = scope_difference(m.t_scope, m.eliminated);
  m.residual = scope_difference(m.quotient.scope(), m.eliminated);

  const int P = static_cast<int>(m.parent_vars.size());
  const int R = static_cast<int>(m.child_vars.size());
  const int T = static_cast<int>(m.t_scope.size());
  const int inter = static_cast<int>(m.sampled.size());
  const int rest = static_cast<int>(m.free_vars.size());

  if (m.t_scope.empty()) {
    m.edge_class = EdgeClass::independent;
    m.eta = static_cast<int>(m.quotient.rank());
  } else if (m.sampled.empty()) {
    m.edge_class = EdgeClass::deterministic;
    m.eta = std::max({T, R + rest, R + inter});
  } else {
    m.edge_class = EdgeClass::stochastic;
    m.eta = std::max({T, R + rest, R + inter});
  }
  m.reduces_complexity = !m.sampled.empty() && !m.free_vars.empty();
  m.gain = m.edge_class == EdgeClass::stochastic ? P - m.eta : 0;
}

EdgeMetadata analyze_edge(const RegionGraph& graph, const Model& model, int edge) {
  EdgeMetadata m;
  m.edge = edge;
  m.sets = compute_edge_sets(graph, edge);
  const Region& p = graph.region(graph.edge(edge).parent);
  const Region& r = graph.region(graph.edge(edge).child);
  std::set_difference(p.factors.begin(), p.factors.end(), r.factors.begin(), r.factors.end(),
                      std::back_inserter(m.quotient_factors));
  m.quotient = compute_quotient(graph, model, edge);
  classify_edge(graph, m);
  return m;
}

std::vector<EdgeMetadata> analyze_graph(const RegionGraph& graph, const Model& model) {
  std::vector<EdgeMetadata> out;
  out.reserve(graph.num_edges());
  for (std::size_t e = 0; e < graph.num_edges(); ++e) out.push_back(analyze_edge(graph, model, static_cast<int>(e)));
  return out;
}

int sgbp_edge_exponent(const EdgeMetadata& m) {
  switch (m.edge_class) {
    case EdgeClass::independent: return 0;
    case EdgeClass::deterministic:
      return std::max(static_cast<int>(m.t_scope.size()), static_cast<int>(m.child_vars.size()));
    case EdgeClass::stochastic: return m.eta;
  }
  return 0;
}

ComplexitySummary summarize(const RegionGraph& graph, const std::vector<EdgeMetadata>& meta) {
  ComplexitySummary s;
  for (int t : graph.top_regions())
    if (!graph.children(t).empty()) s.a_max = std::max(s.a_max, static_cast<int>(graph.region(t).variables.size()));
  for (const auto& m : meta) s.sgbp_exponent = std::max(s.sgbp_exponent, sgbp_edge_exponent(m));
  s.dominant_gain = s.a_max - s.sgbp_exponent;
  return s;
}

}  // namespace sgbp

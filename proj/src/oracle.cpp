#include "sgbp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgbp::oracle {

namespace {

// Advances a base-d odometer over the listed variables; false after the last one.
bool next_assignment(std::vector<int>& x, const std::vector<int>& vars, int d) {
  for (std::size_t k = vars.size(); k-- > 0;) {
    int& digit = x[static_cast<std::size_t>(vars[k])];
    if (++digit < d) return true;
    digit = 0;
  }
  return false;
}

double message_at(const FactorTable& m, const std::vector<int>& x) {
  std::size_t idx = 0;
  for (int v : m.scope()) idx = idx * static_cast<std::size_t>(m.alphabet()) + static_cast<std::size_t>(x[static_cast<std::size_t>(v)]);
  return m[static_cast<Index>(idx)];
}

std::vector<bool> reachable_from(const RegionGraph& graph, int start) {
  std::vector<bool> seen(graph.num_regions(), false);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!stack.empty()) {
    const int r = stack.back();
    stack.pop_back();
    for (const auto& e : graph.edges())
      if (e.parent == r && !seen[static_cast<std::size_t>(e.child)]) {
        seen[static_cast<std::size_t>(e.child)] = true;
        stack.push_back(e.child);
      }
  }
  return seen;
}

}  // namespace

ExactResult exact_marginals(const Model& model, const std::vector<Scope>& subsets) {
  const int n = model.num_variables();
  const int d = model.alphabet_size();
  if (std::pow(static_cast<double>(d), n) > 1e8) throw std::length_error("exact enumeration needs d^n <= 1e8");

  ExactResult res;
  for (const auto& s : subsets) {
    Scope sorted = s;
    std::sort(sorted.begin(), sorted.end());
    res.marginals.emplace_back(sorted, d, 0.0);
  }
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) all[static_cast<std::size_t>(v)] = v;
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  do {
    double p = 1.0;
    for (const auto& f : model.factors()) p *= f.table.at_global(x);
    res.partition_function += p;
    for (auto& m : res.marginals) {
      std::size_t idx = 0;
      for (int v : m.scope()) idx = idx * static_cast<std::size_t>(d) + static_cast<std::size_t>(x[static_cast<std::size_t>(v)]);
      m[static_cast<Index>(idx)] += p;
    }
  } while (next_assignment(x, all, d));
  if (res.partition_function > 0.0)
    for (auto& m : res.marginals) m.values() /= res.partition_function;
  return res;
}

ReferenceEdgeSets reference_edge_sets(const RegionGraph& graph, int edge) {
  const int p = graph.edge(edge).parent;
  const int r = graph.edge(edge).child;
  const auto closure_p = reachable_from(graph, p);  // E(P)
  const auto closure_r = reachable_from(graph, r);  // E(R)
  ReferenceEdgeSets out;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const int i = graph.edges()[e].parent;
    const int j = graph.edges()[e].child;
    const bool i_in_ep = closure_p[static_cast<std::size_t>(i)];
    const bool j_in_ep = closure_p[static_cast<std::size_t>(j)];
    const bool i_in_er = closure_r[static_cast<std::size_t>(i)];
    const bool j_in_er = closure_r[static_cast<std::size_t>(j)];
    const bool i_desc_p = i_in_ep && i != p;
    if (!i_in_ep && j_in_ep && !j_in_er) out.numerator.push_back(static_cast<int>(e));
    if (i_desc_p && !i_in_er && j_in_er) out.denominator.push_back(static_cast<int>(e));
  }
  return out;
}

FactorTable reference_update(const MessageSet& messages, int edge, const RegionGraph& graph, const Model& model) {
  const Region& P = graph.region(graph.edge(edge).parent);
  const Region& R = graph.region(graph.edge(edge).child);
  const int d = model.alphabet_size();
  const auto sets = reference_edge_sets(graph, edge);

  std::vector<int> eliminated;
  for (int v : P.variables)
    if (std::find(R.variables.begin(), R.variables.end(), v) == R.variables.end()) eliminated.push_back(v);

  FactorTable out(R.variables, d, 0.0);
  std::vector<int> x(static_cast<std::size_t>(model.num_variables()), 0);
  Index out_idx = 0;
  do {
    double total = 0.0;
    for (int v : eliminated) x[static_cast<std::size_t>(v)] = 0;
    do {
      double phi_p = 1.0;
      for (int a : P.factors) phi_p *= model.factor(a).table.at_global(x);
      double phi_r = 1.0;
      for (int a : R.factors) phi_r *= model.factor(a).table.at_global(x);
      double ratio = 1.0;
      for (int e : sets.numerator) ratio *= message_at(messages[static_cast<std::size_t>(e)], x);
      for (int e : sets.denominator) ratio /= message_at(messages[static_cast<std::size_t>(e)], x);
      const double q = phi_r == 0.0 ? 0.0 : phi_p / phi_r;
      total += q * ratio;
    } while (next_assignment(x, eliminated, d));
    out[out_idx++] = total;
  } while (next_assignment(x, R.variables, d));

  const double s = out.sum();
  if (!(s > 0.0)) throw std::domain_error("reference update is identically zero");
  out.values() /= s;
  if (out.values().minCoeff() < kMessageFloor) {
    out.values() = out.values().cwiseMax(kMessageFloor);
    out.values() /= out.sum();
  }
  return out;
}

}  // namespace sgbp::oracle

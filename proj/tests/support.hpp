#pragma once

#include "sgbp/experiments.hpp"
#include "sgbp/gbp.hpp"
#include "sgbp/model.hpp"
#include "sgbp/region_graph.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace testing {

using namespace sgbp;

inline FactorTable random_table(Scope scope, int d, std::mt19937& rng, double lo = 0.1, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  FactorTable t(std::move(scope), d, 0.0);
  for (Index i = 0; i < t.size(); ++i) t[i] = u(rng);
  return t;
}

inline Scope random_subset(int n, int size, std::mt19937& rng) {
  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  std::shuffle(all.begin(), all.end(), rng);
  Scope s(all.begin(), all.begin() + size);
  std::sort(s.begin(), s.end());
  return s;
}

/// Unary factors on every variable plus a few random pairwise and triple factors.
inline ModelSpec random_model(int n, int d, std::mt19937& rng) {
  ModelSpec spec{n, d, {}};
  for (int v = 0; v < n; ++v) spec.factors.push_back({"u" + std::to_string(v), random_table({v}, d, rng)});
  std::set<Scope> used;
  std::uniform_int_distribution<int> count(1, n + 1);
  const int extra = count(rng);
  for (int k = 0; k < extra; ++k) {
    const int arity = std::min(n, std::uniform_int_distribution<int>(2, 3)(rng));
    if (arity < 2) break;
    Scope s = random_subset(n, arity, rng);
    if (!used.insert(s).second) continue;
    spec.factors.push_back({"f" + std::to_string(k), random_table(s, d, rng)});
  }
  return spec;
}

inline std::vector<std::string> covered(const Scope& vars, const Model& model) {
  std::vector<std::string> ids;
  for (const auto& f : model.factors())
    if (scope_includes(vars, f.variables())) ids.push_back(f.id);
  return ids;
}

/// Random top regions closed under intersection (at most `max_regions`
/// regions), each holding every factor it covers. Edges join each region to its
/// maximal proper subsets and, with probability 1/3, to further subsets.
inline RegionGraphSpec random_regions(const Model& model, std::mt19937& rng, int max_regions = 8) {
  const int n = model.num_variables();
  std::vector<Scope> sets;
  std::uniform_int_distribution<int> tops(2, 3);
  const int num_tops = tops(rng);
  for (int k = 0; k < num_tops; ++k) {
    const int size = std::uniform_int_distribution<int>(std::min(2, n), std::min(n, 4))(rng);
    Scope s = random_subset(n, size, rng);
    if (std::find(sets.begin(), sets.end(), s) == sets.end()) sets.push_back(s);
  }
  for (bool grew = true; grew && static_cast<int>(sets.size()) < max_regions;) {
    grew = false;
    const std::size_t count = sets.size();
    for (std::size_t i = 0; i < count && static_cast<int>(sets.size()) < max_regions; ++i)
      for (std::size_t j = i + 1; j < count && static_cast<int>(sets.size()) < max_regions; ++j) {
        Scope x = scope_intersection(sets[i], sets[j]);
        if (x.empty() || std::find(sets.begin(), sets.end(), x) != sets.end()) continue;
        sets.push_back(x);
        grew = true;
      }
  }
  RegionGraphSpec spec;
  for (std::size_t i = 0; i < sets.size(); ++i)
    spec.regions.push_back({"R" + std::to_string(i), sets[i], covered(sets[i], model)});
  std::bernoulli_distribution extra(1.0 / 3.0);
  for (std::size_t p = 0; p < sets.size(); ++p)
    for (std::size_t c = 0; c < sets.size(); ++c) {
      if (p == c || sets[c].size() >= sets[p].size() || !scope_includes(sets[p], sets[c])) continue;
      const bool maximal = std::none_of(sets.begin(), sets.end(), [&](const Scope& m) {
        return m.size() < sets[p].size() && m.size() > sets[c].size() && scope_includes(sets[p], m) &&
               scope_includes(m, sets[c]);
      });
      if (maximal || extra(rng)) spec.edges.emplace_back(spec.regions[p].id, spec.regions[c].id);
    }
  return spec;
}

inline Problem random_problem(std::mt19937& rng, int max_n = 6, int max_d = 3) {
  const int n = std::uniform_int_distribution<int>(3, max_n)(rng);
  const int d = std::uniform_int_distribution<int>(2, max_d)(rng);
  Model model = build_model(random_model(n, d, rng));
  RegionGraph graph = build_region_graph(random_regions(model, rng), model);
  return make_problem(std::move(model), std::move(graph));
}

/// Random tree-structured pairwise model.
inline ModelSpec random_tree_model(int n, int d, std::mt19937& rng) {
  ModelSpec spec{n, d, {}};
  for (int v = 0; v < n; ++v) spec.factors.push_back({"u" + std::to_string(v), random_table({v}, d, rng)});
  for (int v = 1; v < n; ++v) {
    const int parent = std::uniform_int_distribution<int>(0, v - 1)(rng);
    spec.factors.push_back({"p" + std::to_string(parent) + "_" + std::to_string(v), random_table({parent, v}, d, rng)});
  }
  return spec;
}

/// 3×3 Potts grid with the 2×2 cluster region graph.
inline Problem grid_fixture(int d, double gamma = 0.1, double mu = 0.1, double sigma = 0.1, std::uint64_t seed = 0) {
  return potts_cluster_problem(PottsParams{3, 3, gamma, mu, sigma, seed}, d);
}

inline int edge_by_label(const Problem& p, const std::string& parent, const std::string& child) {
  return p.graph.edge_index(p.graph.region_index(parent), p.graph.region_index(child));
}

inline double max_rel_diff(const FactorTable& a, const FactorTable& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
  return worst;
}

/// P{0,1,2} -> R{0,1} is E2; P -> J{0} and Q{0,3} -> J are E1.
inline Problem small_e2_problem(std::uint32_t seed = 1, int d = 2) {
  ModelSpec spec{4, d, {}};
  std::mt19937 rng(seed);
  for (int v = 0; v < 4; ++v) spec.factors.push_back({"u" + std::to_string(v), random_table({v}, d, rng)});
  spec.factors.push_back({"f01", random_table({0, 1}, d, rng)});
  spec.factors.push_back({"f12", random_table({1, 2}, d, rng)});
  spec.factors.push_back({"f03", random_table({0, 3}, d, rng)});
  Model m = build_model(spec);
  RegionGraphSpec rs{{{"P", {0, 1, 2}, {"u0", "u1", "u2", "f01", "f12"}},
                      {"R", {0, 1}, {"u0", "u1", "f01"}},
                      {"J", {0}, {"u0"}},
                      {"Q", {0, 3}, {"u0", "u3", "f03"}}},
                     {{"P", "R"}, {"P", "J"}, {"Q", "J"}}};
  RegionGraph g = build_region_graph(rs, m);
  return make_problem(std::move(m), std::move(g));
}

}  // namespace testing

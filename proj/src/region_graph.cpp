#include "sgbp/region_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace sgbp {

int RegionGraph::region_index(const std::string& id) const {
  for (std::size_t i = 0; i < regions_.size(); ++i)
    if (regions_[i].id == id) return static_cast<int>(i);
  return -1;
}

int RegionGraph::edge_index(int parent, int child) const {
  for (std::size_t e = 0; e < edges_.size(); ++e)
    if (edges_[e].parent == parent && edges_[e].child == child) return static_cast<int>(e);
  return -1;
}

std::vector<int> RegionGraph::edges_top_down() const {
  std::vector<int> pos(regions_.size());
  for (std::size_t i = 0; i < topo_.size(); ++i) pos[static_cast<std::size_t>(topo_[i])] = static_cast<int>(i);
  std::vector<int> order(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) order[e] = static_cast<int>(e);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return pos[static_cast<std::size_t>(edges_[static_cast<std::size_t>(a)].parent)] <
           pos[static_cast<std::size_t>(edges_[static_cast<std::size_t>(b)].parent)];
  });
  return order;
}

RegionGraph build_region_graph(std::vector<Region> regions, std::vector<Edge> edges, const Model& model) {
  const std::size_t n = regions.size();
  std::set<std::string> ids;
  for (auto& r : regions) {
    if (!ids.insert(r.id).second) throw std::invalid_argument("duplicate region id '" + r.id + "'");
    std::sort(r.variables.begin(), r.variables.end());
    std::sort(r.factors.begin(), r.factors.end());
    if (!is_sorted_unique(r.variables)) throw std::invalid_argument("region '" + r.id + "' repeats a variable");
    if (!is_sorted_unique(r.factors)) throw std::invalid_argument("region '" + r.id + "' repeats a factor");
    for (int v : r.variables)
      if (v < 0 || v >= model.num_variables())
        throw std::invalid_argument("region '" + r.id + "' references unknown variable " + std::to_string(v));
    for (int a : r.factors) {
      if (a < 0 || a >= static_cast<int>(model.factors().size()))
        throw std::invalid_argument("region '" + r.id + "' references unknown factor " + std::to_string(a));
      if (!scope_includes(r.variables, model.factor(a).variables()))
        throw std::invalid_argument("region '" + r.id + "' holds factor '" + model.factor(a).id +
                                    "' without all of its variables");
    }
  }

  RegionGraph g;
  g.regions_ = std::move(regions);
  g.parents_.assign(n, {});
  g.children_.assign(n, {});
  std::set<std::pair<int, int>> seen;
  for (const auto& e : edges) {
    if (e.parent < 0 || e.child < 0 || static_cast<std::size_t>(e.parent) >= n || static_cast<std::size_t>(e.child) >= n)
      throw std::invalid_argument("edge references an unknown region");
    const Region& p = g.regions_[static_cast<std::size_t>(e.parent)];
    const Region& c = g.regions_[static_cast<std::size_t>(e.child)];
    const std::string label = p.id + "->" + c.id;
    if (!seen.insert({e.parent, e.child}).second) throw std::invalid_argument("duplicate edge " + label);
    if (!scope_includes(p.variables, c.variables) || p.variables.size() == c.variables.size())
      throw std::invalid_argument("edge " + label + ": child variables are not a strict subset of the parent's");
    if (!std::includes(p.factors.begin(), p.factors.end(), c.factors.begin(), c.factors.end()))
      throw std::invalid_argument("edge " + label + ": child factors are not a subset of the parent's");
    g.parents_[static_cast<std::size_t>(e.child)].push_back(e.parent);
    g.children_[static_cast<std::size_t>(e.parent)].push_back(e.child);
  }
  g.edges_ = std::move(edges);

  // Kahn's algorithm; strict variable inclusion already rules out cycles, but
  // the check stays independent of that argument.
  std::vector<int> indeg(n);
  for (std::size_t r = 0; r < n; ++r) indeg[r] = static_cast<int>(g.parents_[r].size());
  std::vector<int> queue;
  for (std::size_t r = 0; r < n; ++r)
    if (indeg[r] == 0) queue.push_back(static_cast<int>(r));
  g.tops_ = queue;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (int c : g.children_[static_cast<std::size_t>(queue[head])])
      if (--indeg[static_cast<std::size_t>(c)] == 0) queue.push_back(c);
  if (queue.size() != n) {
    for (std::size_t r = 0; r < n; ++r)
      if (indeg[r] > 0) throw std::invalid_argument("cycle detected through region '" + g.regions_[r].id + "'");
  }
  g.topo_ = queue;

  g.in_closure_.assign(n * n, 0);
  for (auto it = g.topo_.rbegin(); it != g.topo_.rend(); ++it) {
    const auto r = static_cast<std::size_t>(*it);
    g.in_closure_[r * n + r] = 1;
    for (int c : g.children_[r])
      for (std::size_t x = 0; x < n; ++x)
        if (g.in_closure_[static_cast<std::size_t>(c) * n + x]) g.in_closure_[r * n + x] = 1;
  }
  g.ancestors_.assign(n, {});
  g.descendants_.assign(n, {});
  g.closure_.assign(n, {});
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t x = 0; x < n; ++x) {
      if (!g.in_closure_[r * n + x]) continue;
      g.closure_[r].push_back(static_cast<int>(x));
      if (x != r) {
        g.descendants_[r].push_back(static_cast<int>(x));
        g.ancestors_[x].push_back(static_cast<int>(r));
      }
    }
  for (auto& a : g.ancestors_) std::sort(a.begin(), a.end());
  return g;
}

RegionGraph build_region_graph(const RegionGraphSpec& spec, const Model& model) {
  std::vector<Region> regions;
  std::map<std::string, int> index;
  for (const auto& rs : spec.regions) {
    Region r{rs.id, rs.variables, {}};
    for (const auto& fid : rs.factors) {
      const int a = model.factor_index(fid);
      if (a < 0) throw std::invalid_argument("region '" + rs.id + "' references unknown factor '" + fid + "'");
      r.factors.push_back(a);
    }
    index.emplace(rs.id, static_cast<int>(regions.size()));
    regions.push_back(std::move(r));
  }
  std::vector<Edge> edges;
  for (const auto& [p, c] : spec.edges) {
    auto ip = index.find(p);
    auto ic = index.find(c);
    if (ip == index.end() || ic == index.end())
      throw std::invalid_argument("edge " + p + "->" + c + " references an unknown region");
    edges.push_back({ip->second, ic->second});
  }
  return build_region_graph(std::move(regions), std::move(edges), model);
}

FactorTable region_potential(const Region& region, const Model& model) {
  FactorTable out(region.variables, model.alphabet_size(), 1.0);
  for (int a : region.factors) out = pointwise(PointwiseOp::multiply, out, model.factor(a).table);
  return out;
}

std::string region_label(const Scope& variables) {
  const bool short_labels = std::all_of(variables.begin(), variables.end(), [](int v) { return v < 9; });
  std::string s;
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (!short_labels && i > 0) s += '_';
    s += std::to_string(variables[i] + 1);
  }
  return s;
}

namespace {

std::vector<std::string> covered_factors(const Scope& vars, const Model& model) {
  std::vector<std::string> out;
  for (const auto& f : model.factors())
    if (scope_includes(vars, f.variables())) out.push_back(f.id);
  return out;
}

}  // namespace

RegionGraphSpec make_grid_cluster_regions(int rows, int cols, const Model& model) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("grid cluster regions need at least a 2x2 grid");
  if (rows * cols != model.num_variables()) throw std::invalid_argument("grid size does not match the model");

  std::vector<Scope> sets;
  for (int r = 0; r + 1 < rows; ++r)
    for (int c = 0; c + 1 < cols; ++c) {
      const int v = r * cols + c;
      sets.push_back({v, v + 1, v + cols, v + cols + 1});
    }
  // Close under pairwise intersection.
  for (bool grew = true; grew;) {
    grew = false;
    const std::size_t count = sets.size();
    for (std::size_t i = 0; i < count; ++i)
      for (std::size_t j = i + 1; j < count; ++j) {
        Scope x = scope_intersection(sets[i], sets[j]);
        if (x.empty() || std::find(sets.begin(), sets.end(), x) != sets.end()) continue;
        sets.push_back(std::move(x));
        grew = true;
      }
  }

  RegionGraphSpec spec;
  for (const auto& s : sets) spec.regions.push_back({region_label(s), s, covered_factors(s, model)});
  for (std::size_t p = 0; p < sets.size(); ++p)
    for (std::size_t c = 0; c < sets.size(); ++c) {
      if (p == c || sets[c].size() >= sets[p].size() || !scope_includes(sets[p], sets[c])) continue;
      const bool maximal = std::none_of(sets.begin(), sets.end(), [&](const Scope& m) {
        return m.size() < sets[p].size() && m.size() > sets[c].size() && scope_includes(sets[p], m) &&
               scope_includes(m, sets[c]);
      });
      if (maximal) spec.edges.emplace_back(spec.regions[p].id, spec.regions[c].id);
    }
  return spec;
}

RegionGraphSpec make_bethe_regions(const Model& model) {
  RegionGraphSpec spec;
  const int n = model.num_variables();
  std::vector<std::vector<std::string>> unary(static_cast<std::size_t>(n));
  for (const auto& f : model.factors())
    if (f.variables().size() == 1) unary[static_cast<std::size_t>(f.variables()[0])].push_back(f.id);

  std::vector<int> degree(static_cast<std::size_t>(n), 0);
  std::vector<std::string> top_ids;
  for (const auto& f : model.factors()) {
    if (f.variables().size() < 2) continue;
    RegionSpec r{"F:" + f.id, f.variables(), {f.id}};
    for (int v : f.variables()) {
      ++degree[static_cast<std::size_t>(v)];
      for (const auto& u : unary[static_cast<std::size_t>(v)]) r.factors.push_back(u);
    }
    spec.regions.push_back(std::move(r));
  }
  const std::size_t num_tops = spec.regions.size();
  for (int v = 0; v < n; ++v) {
    const auto deg = degree[static_cast<std::size_t>(v)];
    if (deg == 1) continue;
    // Shared variables become children; isolated variables become their own top.
    spec.regions.push_back({"V:" + std::to_string(v), {v}, unary[static_cast<std::size_t>(v)]});
    if (deg == 0) continue;
    for (std::size_t t = 0; t < num_tops; ++t) {
      const auto& vars = spec.regions[t].variables;
      if (std::binary_search(vars.begin(), vars.end(), v)) spec.edges.emplace_back(spec.regions[t].id, spec.regions.back().id);
    }
  }
  return spec;
}

}  // namespace sgbp

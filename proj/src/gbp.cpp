#include "sgbp/gbp.hpp"

#include "sgbp/philox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sgbp {

Problem make_problem(Model model, RegionGraph graph) {
  Problem p{std::move(model), std::move(graph), {}};
  p.edges = analyze_graph(p.graph, p.model);
  return p;
}

Eigen::VectorXd MessageSet::flatten() const {
  Index n = 0;
  for (const auto& t : tables) n += t.size();
  Eigen::VectorXd v(n);
  Index at = 0;
  for (const auto& t : tables) {
    v.segment(at, t.size()) = t.values();
    at += t.size();
  }
  return v;
}

Eigen::VectorXd MessageSet::flatten(const std::vector<int>& edges) const {
  Index n = 0;
  for (int e : edges) n += tables[static_cast<std::size_t>(e)].size();
  Eigen::VectorXd v(n);
  Index at = 0;
  for (int e : edges) {
    const auto& t = tables[static_cast<std::size_t>(e)];
    v.segment(at, t.size()) = t.values();
    at += t.size();
  }
  return v;
}

MessageSet uniform_messages(const RegionGraph& graph, int alphabet) {
  MessageSet m;
  for (const auto& e : graph.edges()) {
    const Scope& scope = graph.region(e.child).variables;
    m.tables.emplace_back(scope, alphabet, 1.0 / static_cast<double>(ipow(alphabet, scope.size())));
  }
  return m;
}

void normalize_message(FactorTable& t) {
  if (!normalize(t)) throw std::domain_error("message sums to zero");
  if (t.values().minCoeff() < kMessageFloor) {
    t.values() = t.values().cwiseMax(kMessageFloor);
    t.values() /= t.sum();
  }
}

FactorTable mix_messages(const FactorTable& old, const FactorTable& update, double alpha) {
  FactorTable out(old.scope(), old.alphabet(), ((1.0 - alpha) * old.values() + alpha * update.values()).eval());
  normalize_message(out);
  return out;
}

MessageSet initial_messages(const Problem& problem) {
  MessageSet m = uniform_messages(problem.graph, problem.alphabet());
  for (const auto& meta : problem.edges)
    if (meta.edge_class == EdgeClass::independent)
      m[static_cast<std::size_t>(meta.edge)] = gbp_update_edge(m, meta, problem);
  return m;
}

FactorTable mhat(const MessageSet& messages, const EdgeMetadata& meta, int d, OpCounts* ops) {
  FactorTable out(meta.t_scope, d, 1.0);
  if (meta.t_scope.empty()) return out;
  const std::size_t rank = meta.t_scope.size();
  for (int e : meta.sets.numerator) {
    const FactorTable& m = messages[static_cast<std::size_t>(e)];
    std::array<std::vector<Index>, 1> st{strides_in(m.scope(), meta.t_scope, d)};
    Index i = 0;
    for_each_assignment<1>(d, rank, st, {0}, [&](const std::array<Index, 1>& o) { out[i++] *= m[o[0]]; });
  }
  for (int e : meta.sets.denominator) {
    const FactorTable& m = messages[static_cast<std::size_t>(e)];
    std::array<std::vector<Index>, 1> st{strides_in(m.scope(), meta.t_scope, d)};
    Index i = 0;
    for_each_assignment<1>(d, rank, st, {0}, [&](const std::array<Index, 1>& o) {
      if (!(m[o[0]] >= kMessageFloor * 0.5)) throw std::logic_error("denominator message below the floor");
      out[i++] /= m[o[0]];
    });
  }
  if (ops) ops->mhat += static_cast<std::uint64_t>(out.size());
  return out;
}

FactorTable gbp_update_unnormalized(const MessageSet& messages, const EdgeMetadata& meta, int d, OpCounts* ops) {
  const FactorTable m_hat = mhat(messages, meta, d, ops);
  const FactorTable& q = meta.quotient;
  FactorTable out(meta.child_vars, d, 0.0);

  const std::array<std::vector<Index>, 2> outer{strides_in(q.scope(), meta.child_vars, d),
                                                strides_in(m_hat.scope(), meta.child_vars, d)};
  const std::array<std::vector<Index>, 2> inner{strides_in(q.scope(), meta.eliminated, d),
                                                strides_in(m_hat.scope(), meta.eliminated, d)};
  Index r = 0;
  std::uint64_t terms = 0;
  for_each_assignment<2>(d, meta.child_vars.size(), outer, {0, 0}, [&](const std::array<Index, 2>& base) {
    double acc = 0.0;
    for_each_assignment<2>(d, meta.eliminated.size(), inner, base, [&](const std::array<Index, 2>& o) {
      acc += q[o[0]] * m_hat[o[1]];
      ++terms;
    });
    out[r++] = acc;
  });
  if (ops) ops->contraction += terms;
  return out;
}

FactorTable gbp_update_edge(const MessageSet& messages, const EdgeMetadata& meta, const Problem& problem,
                            OpCounts* ops) {
  FactorTable out = gbp_update_unnormalized(messages, meta, problem.alphabet(), ops);
  if (!(out.sum() > 0.0)) throw std::domain_error("GBP update on edge " + problem.graph.edge_label(meta.edge) + " is identically zero");
  normalize_message(out);
  return out;
}

MessageSet gbp_iterate(const Problem& problem, const MessageSet& messages, const IterateOptions& options,
                       OpCounts* ops) {
  if (!(options.damping >= 0.0 && options.damping < 1.0)) throw std::invalid_argument("damping must lie in [0, 1)");
  auto step = [&](const MessageSet& source, int e) {
    FactorTable next = gbp_update_edge(source, problem.edges[static_cast<std::size_t>(e)], problem, ops);
    if (options.damping > 0.0) next = mix_messages(messages[static_cast<std::size_t>(e)], next, 1.0 - options.damping);
    return next;
  };
  MessageSet out = messages;
  if (options.schedule == Schedule::synchronous) {
    for (std::size_t e = 0; e < problem.edges.size(); ++e) out[e] = step(messages, static_cast<int>(e));
  } else {
    for (int e : problem.graph.edges_top_down()) out[static_cast<std::size_t>(e)] = step(out, e);
  }
  return out;
}

FixedPointResult run_to_fixed_point(const Problem& problem, MessageSet messages, double tol, int max_iters,
                                    const IterateOptions& options) {
  FixedPointResult res{std::move(messages), false, 0, {}};
  for (int it = 0; it < max_iters; ++it) {
    MessageSet next = gbp_iterate(problem, res.messages, options);
    const double r = (next.flatten() - res.messages.flatten()).norm();
    res.messages = std::move(next);
    res.residuals.push_back(r);
    res.iterations = it + 1;
    if (r < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

FixedPointResult reference_fixed_point(const Problem& problem, int max_iters) {
  return run_to_fixed_point(problem, initial_messages(problem), 1e-12, max_iters, {Schedule::asynchronous, 0.5});
}

std::vector<int> belief_edges(const RegionGraph& graph, int region) {
  std::vector<int> out;
  for (int p : graph.parents(region)) out.push_back(graph.edge_index(p, region));
  for (int d : graph.descendants(region))
    for (int p : graph.parents(d))
      if (!graph.in_closure(region, p)) out.push_back(graph.edge_index(p, d));
  return out;
}

FactorTable compute_belief(const Problem& problem, const MessageSet& messages, int region) {
  FactorTable b = region_potential(problem.graph.region(region), problem.model);
  for (int e : belief_edges(problem.graph, region)) b = b * messages[static_cast<std::size_t>(e)];
  if (!normalize(b)) throw std::domain_error("belief of region '" + problem.graph.region(region).id + "' is zero");
  return b;
}

FactorTable variable_belief(const Problem& problem, const MessageSet& messages, int var) {
  int best = -1;
  for (std::size_t r = 0; r < problem.graph.num_regions(); ++r) {
    const auto& vars = problem.graph.region(static_cast<int>(r)).variables;
    if (!std::binary_search(vars.begin(), vars.end(), var)) continue;
    if (best < 0 || vars.size() < problem.graph.region(best).variables.size()) best = static_cast<int>(r);
  }
  if (best < 0) throw std::invalid_argument("variable " + std::to_string(var) + " is in no region");
  FactorTable b = marginalize(compute_belief(problem, messages, best), Scope{var});
  normalize(b);
  return b;
}

ContractionProbe probe_contraction(const Problem& problem, const MessageSet& fixed_point, int samples, double radius,
                                   std::uint64_t seed) {
  const Philox4x32 rng(seed);
  std::uint32_t draw = 0;
  auto perturb = [&](std::uint32_t sample) {
    MessageSet m = fixed_point;
    for (std::size_t e = 0; e < m.size(); ++e) {
      for (Index i = 0; i < m[e].size(); ++i) {
        const double u = rng.uniform({sample, static_cast<std::uint32_t>(e), static_cast<std::uint32_t>(i), draw});
        m[e][i] *= 1.0 + radius * (2.0 * u - 1.0);
      }
      normalize_message(m[e]);
    }
    ++draw;
    return m;
  };
  ContractionProbe probe;
  for (int s = 0; s < samples; ++s) {
    const MessageSet a = perturb(static_cast<std::uint32_t>(s));
    const MessageSet b = perturb(static_cast<std::uint32_t>(s));
    const double denom = (a.flatten() - b.flatten()).norm();
    if (denom == 0.0) continue;
    const double num = (gbp_iterate(problem, a).flatten() - gbp_iterate(problem, b).flatten()).norm();
    probe.max_ratio = std::max(probe.max_ratio, num / denom);
  }
  probe.nu = 2.0 * (1.0 - probe.max_ratio);
  return probe;
}

}  // namespace sgbp

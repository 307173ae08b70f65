#include "sgbp/sgbp.hpp"

#include "sgbp/gauge.hpp"
#include "sgbp/philox.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <stdexcept>
#include <thread>

namespace sgbp {

namespace {

constexpr std::uint32_t kSampleStream = 0x73676270u;  // "sgbp"

Index scope_size(int d, const Scope& s) { return ipow(d, s.size()); }

}  // namespace

QTables build_q_and_k(const FactorTable& m_hat, const EdgeMetadata& meta, int d) {
  if (meta.edge_class != EdgeClass::stochastic) throw std::invalid_argument("Q and k exist only on stochastic edges");
  const Index rows = scope_size(d, meta.conditioning);
  const Index cols = scope_size(d, meta.sampled);
  QTables out{Eigen::MatrixXd::Zero(rows, cols), Eigen::VectorXd::Zero(rows)};
  const std::array<std::vector<Index>, 1> cst{strides_in(m_hat.scope(), meta.conditioning, d)};
  const std::array<std::vector<Index>, 1> sst{strides_in(m_hat.scope(), meta.sampled, d)};
  Index c = 0;
  for_each_assignment<1>(d, meta.conditioning.size(), cst, {0}, [&](const std::array<Index, 1>& base) {
    Index s = 0;
    for_each_assignment<1>(d, meta.sampled.size(), sst, base,
                           [&](const std::array<Index, 1>& o) { out.q(c, s++) = m_hat[o[0]]; });
    out.k(c) = out.q.row(c).sum();
    if (out.k(c) > 0.0) out.q.row(c) /= out.k(c);
    ++c;
  });
  if (!(out.k.maxCoeff() > 0.0)) throw std::domain_error("k_PR is identically zero on edge");
  return out;
}

FactorTable stochastic_innovation(const EdgeMetadata& meta, const QTables& qk, std::span<const Index> samples,
                                  int d, OpCounts* ops) {
  const FactorTable& phi = meta.quotient;
  if (static_cast<Index>(samples.size()) != qk.k.size())
    throw std::invalid_argument("need one sample per conditioning value");

  // Offset of each chosen sampled assignment inside Φ_{P\R}.
  const auto s_strides = strides_in(phi.scope(), meta.sampled, d);
  std::vector<Index> phi_offset(samples.size(), 0);
  for (std::size_t c = 0; c < samples.size(); ++c) {
    if (samples[c] < 0 || samples[c] >= qk.q.cols()) throw std::out_of_range("sample index out of range");
    if (!(qk.k(static_cast<Index>(c)) > 0.0)) throw std::domain_error("sampling from an invalid Q slice");
    Index rem = samples[c];
    for (std::size_t k = meta.sampled.size(); k-- > 0;) {
      phi_offset[c] += (rem % d) * s_strides[k];
      rem /= d;
    }
  }

  FactorTable out(meta.child_vars, d, 0.0);
  const std::array<std::vector<Index>, 2> outer{strides_in(phi.scope(), meta.child_vars, d),
                                                strides_in(meta.conditioning, meta.child_vars, d)};
  const std::array<std::vector<Index>, 1> inner{strides_in(phi.scope(), meta.free_vars, d)};
  Index r = 0;
  std::uint64_t terms = 0;
  for_each_assignment<2>(d, meta.child_vars.size(), outer, {0, 0}, [&](const std::array<Index, 2>& o) {
    const auto c = static_cast<std::size_t>(o[1]);
    double acc = 0.0;
    for_each_assignment<1>(d, meta.free_vars.size(), inner, {o[0] + phi_offset[c]}, [&](const std::array<Index, 1>& f) {
      acc += phi[f[0]];
      ++terms;
    });
    out[r++] = qk.k(o[1]) * acc;
  });
  if (ops) ops->contraction += terms;
  return out;
}

std::uint64_t gbp_edge_ops(const EdgeMetadata& meta, int d) {
  const Index mh = meta.t_scope.empty() ? 0 : scope_size(d, meta.t_scope);
  return static_cast<std::uint64_t>(mh + scope_size(d, meta.parent_vars));
}

std::vector<int> non_independent_edges(const Problem& problem) {
  std::vector<int> out;
  for (const auto& m : problem.edges)
    if (m.edge_class != EdgeClass::independent) out.push_back(m.edge);
  return out;
}

double normalized_sq_error(const MessageSet& a, const MessageSet& b, const std::vector<int>& edges) {
  if (edges.empty()) return 0.0;
  const Eigen::VectorXd ref = b.flatten(edges);
  return (a.flatten(edges) - ref).squaredNorm() / ref.squaredNorm();
}

SgbpEngine::SgbpEngine(const Problem& problem, SgbpOptions options)
    : problem_(problem), options_(std::move(options)), messages_(initial_messages(problem)) {
  work_.resize(problem.edges.size());
  for (const auto& m : problem.edges) {
    auto& w = work_[static_cast<std::size_t>(m.edge)];
    if (m.edge_class == EdgeClass::deterministic) {
      w.reduced_potential = marginalize(broadcast(m.quotient, m.parent_vars), m.child_vars);
    } else if (m.edge_class == EdgeClass::stochastic) {
      w.mass_over_t = marginalize(broadcast(m.quotient, m.parent_vars), m.t_scope);
    }
  }
}

FactorTable SgbpEngine::update_edge(int edge, long t, double alpha, OpCounts* ops) {
  const EdgeMetadata& meta = problem_.edges[static_cast<std::size_t>(edge)];
  const EdgeWorkspace& w = work_[static_cast<std::size_t>(edge)];
  const FactorTable& old = messages_[static_cast<std::size_t>(edge)];
  const int d = problem_.alphabet();

  switch (meta.edge_class) {
    case EdgeClass::independent:
      return old;

    case EdgeClass::deterministic: {
      const FactorTable m_hat = mhat(messages_, meta, d, ops);
      FactorTable y = w.reduced_potential * m_hat;
      if (ops) ops->contraction += static_cast<std::uint64_t>(y.size());
      if (!(y.sum() > 0.0))
        throw std::domain_error("deterministic update on edge " + problem_.graph.edge_label(edge) + " is zero");
      normalize_message(y);
      return mix_messages(old, y, alpha);
    }

    case EdgeClass::stochastic: {
      const FactorTable m_hat = mhat(messages_, meta, d, ops);
      const QTables qk = build_q_and_k(m_hat, meta, d);
      // Exact normalizer of E[Y]: Σ_{x_R} E[Y](x_R) = Σ_T M̂(x_T) G(x_T).
      const double mass = m_hat.values().dot(w.mass_over_t.values());
      if (ops) {
        ops->sampling += static_cast<std::uint64_t>(m_hat.size());
        ops->mhat += static_cast<std::uint64_t>(m_hat.size());
      }
      if (!(mass > 0.0)) throw std::domain_error("edge " + problem_.graph.edge_label(edge) + " has zero mass");

      const Philox4x32 rng(options_.seed);
      std::vector<Index> samples(static_cast<std::size_t>(qk.k.size()));
      for (Index c = 0; c < qk.k.size(); ++c) {
        const double u = rng.uniform({static_cast<std::uint32_t>(edge), static_cast<std::uint32_t>(t),
                                      static_cast<std::uint32_t>(c), kSampleStream ^ static_cast<std::uint32_t>(t >> 32)});
        Index s = 0;
        double cum = qk.q(c, 0);
        while (cum < u && s + 1 < qk.q.cols()) cum += qk.q(c, ++s);
        samples[static_cast<std::size_t>(c)] = s;
        if (ops) ops->sampling += static_cast<std::uint64_t>(qk.q.cols());
      }
      FactorTable y = stochastic_innovation(meta, qk, samples, d, ops);

      if (options_.check_bounds) {
        // k(c) Σ_F min_S Φ ≤ Y(x_R) ≤ k(c) Σ_F max_S Φ
        const FactorTable& phi = meta.quotient;
        const std::array<std::vector<Index>, 2> outer{strides_in(phi.scope(), meta.child_vars, d),
                                                      strides_in(meta.conditioning, meta.child_vars, d)};
        const std::array<std::vector<Index>, 1> fst{strides_in(phi.scope(), meta.free_vars, d)};
        const std::array<std::vector<Index>, 1> sst{strides_in(phi.scope(), meta.sampled, d)};
        Index r = 0;
        for_each_assignment<2>(d, meta.child_vars.size(), outer, {0, 0}, [&](const std::array<Index, 2>& o) {
          double lo = 0.0, hi = 0.0;
          for_each_assignment<1>(d, meta.free_vars.size(), fst, {o[0]}, [&](const std::array<Index, 1>& f) {
            double mn = std::numeric_limits<double>::infinity(), mx = 0.0;
            for_each_assignment<1>(d, meta.sampled.size(), sst, f, [&](const std::array<Index, 1>& s) {
              mn = std::min(mn, phi[s[0]]);
              mx = std::max(mx, phi[s[0]]);
            });
            lo += mn;
            hi += mx;
          });
          const double k = qk.k(o[1]);
          const double v = y[r++];
          if (v < k * lo * (1.0 - 1e-12) || v > k * hi * (1.0 + 1e-12)) ++bound_violations_;
        });
      }

      y.values() /= mass;
      return mix_messages(old, y, alpha);
    }
  }
  return old;
}

double SgbpEngine::step(long t, OpCounts* ops) {
  const double alpha = options_.schedule(t);
  MessageSet next = messages_;
  for (std::size_t e = 0; e < problem_.edges.size(); ++e) next[e] = update_edge(static_cast<int>(e), t, alpha, ops);
  messages_ = std::move(next);
  return alpha;
}

RunTrace SgbpEngine::run(const MessageSet* reference) {
  using clock = std::chrono::steady_clock;
  RunTrace trace;
  trace.has_reference = reference != nullptr;
  const std::vector<int> not1 = non_independent_edges(problem_);
  std::vector<int> all(problem_.edges.size());
  for (std::size_t e = 0; e < all.size(); ++e) all[e] = static_cast<int>(e);
  MessageGauge gauge;
  if (reference) gauge = message_gauge(problem_.graph, problem_.alphabet());
  trace.gauge_dimension = gauge.dimension();
  auto errors = [&](double& not1_err, double& full_err) {
    const MessageSet aligned = gauge_align(gauge, *reference, messages_);
    not1_err = normalized_sq_error(messages_, aligned, not1);
    full_err = normalized_sq_error(messages_, aligned, all);
  };
  if (reference) errors(trace.delta0_not1, trace.delta0_full);
  std::uint64_t gbp_per_iter = 0;
  for (const auto& m : problem_.edges) gbp_per_iter += gbp_edge_ops(m, problem_.alphabet());

  trace.rows.reserve(static_cast<std::size_t>(std::max(0L, options_.iterations)));
  const auto start = clock::now();
  for (long t = 1; t <= options_.iterations; ++t) {
    TraceRow row;
    row.iter = t;
    row.alpha = step(t, &trace.ops);
    row.wallclock_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count();
    row.ops_actual = trace.ops.total();
    row.ops_gbp_equiv = gbp_per_iter * static_cast<std::uint64_t>(t);
    if (reference) errors(row.delta_not1, row.delta_full);
    trace.rows.push_back(row);
  }
  if (reference) trace.unaligned_delta_not1 = normalized_sq_error(messages_, *reference, not1);
  trace.bound_violations = bound_violations_;
  trace.final_messages = messages_;
  return trace;
}

RunTrace sgbp_run(const Problem& problem, const SgbpOptions& options, const MessageSet* reference) {
  SgbpEngine engine(problem, options);
  return engine.run(reference);
}

std::vector<RunTrace> sgbp_run_seeds(const Problem& problem, const SgbpOptions& options, int num_seeds,
                                     const MessageSet* reference, int max_threads) {
  if (max_threads <= 0) max_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<RunTrace> out(static_cast<std::size_t>(std::max(0, num_seeds)));
  for (int begin = 0; begin < num_seeds; begin += max_threads) {
    std::vector<std::future<RunTrace>> jobs;
    const int end = std::min(num_seeds, begin + max_threads);
    for (int s = begin; s < end; ++s) {
      SgbpOptions o = options;
      o.seed = options.seed + static_cast<std::uint64_t>(s);
      jobs.push_back(std::async(std::launch::async, [&problem, o, reference] { return sgbp_run(problem, o, reference); }));
    }
    for (int s = begin; s < end; ++s) out[static_cast<std::size_t>(s)] = jobs[static_cast<std::size_t>(s - begin)].get();
  }
  return out;
}

AveragedTrace average_traces(const std::vector<RunTrace>& runs) {
  AveragedTrace avg;
  avg.runs = static_cast<int>(runs.size());
  if (runs.empty()) return avg;
  const std::size_t len = runs.front().rows.size();
  for (const auto& r : runs)
    if (r.rows.size() != len) throw std::invalid_argument("traces differ in length");
  const double n = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    avg.mean_delta0_not1 += r.delta0_not1 / n;
    avg.mean_delta0_full += r.delta0_full / n;
  }
  for (std::size_t i = 0; i < len; ++i) {
    double s = 0, full = 0, g = 0, a = 0, w = 0;
    for (const auto& r : runs) {
      s += r.rows[i].delta_not1;
      full += r.rows[i].delta_full;
      g += static_cast<double>(r.rows[i].ops_gbp_equiv);
      a += static_cast<double>(r.rows[i].ops_actual);
      w += static_cast<double>(r.rows[i].wallclock_ns);
    }
    const double mean = s / n;
    double var = 0;
    for (const auto& r : runs) var += (r.rows[i].delta_not1 - mean) * (r.rows[i].delta_not1 - mean);
    avg.iter.push_back(runs.front().rows[i].iter);
    avg.alpha.push_back(runs.front().rows[i].alpha);
    avg.mean_delta_not1.push_back(mean);
    avg.var_delta_not1.push_back(runs.size() > 1 ? var / (n - 1.0) : 0.0);
    avg.mean_delta_full.push_back(full / n);
    avg.mean_ops_gbp_equiv.push_back(g / n);
    avg.mean_ops_actual.push_back(a / n);
    avg.mean_wallclock_ns.push_back(w / n);
  }
  return avg;
}

}  // namespace sgbp

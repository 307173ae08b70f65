// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include "sgbp/experiments.hpp"
#include "sgbp/gauge.hpp"
#include "sgbp/io.hpp"
#include "sgbp/oracle.hpp"
#include "sgbp/sgbp.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

using namespace sgbp;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Verdict& v, double seconds) {
  if (!v.pass) ++failures;
  std::printf("criterion %d %-28s %s  (%s; %.1fs)\n", id, name.c_str(), v.pass ? "PASS" : "FAIL", v.detail.c_str(), seconds);
  std::fflush(stdout);
}

template <class F>
void run(int id, const std::string& name, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  report(id, name, v, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
}

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, static_cast<double>(args)...);
  return buf;
}

// Row-major conditioning index of each x_R.
std::vector<Index> conditioning_of(const EdgeMetadata& meta, int d) {
  std::vector<Index> out;
  for (Index flat = 0; flat < ipow(d, meta.child_vars.size()); ++flat) {
    std::vector<int> x(meta.child_vars.size());
    Index rem = flat;
    for (std::size_t k = x.size(); k-- > 0;) {
      x[k] = static_cast<int>(rem % d);
      rem /= d;
    }
    Index c = 0;
    for (int v : meta.conditioning)
      c = c * d + x[static_cast<std::size_t>(std::find(meta.child_vars.begin(), meta.child_vars.end(), v) -
                                             meta.child_vars.begin())];
    out.push_back(c);
  }
  return out;
}

MessageSet random_messages(const Problem& p, std::mt19937& rng) {
  MessageSet m = initial_messages(p);
  for (const auto& meta : p.edges) {
    if (meta.edge_class == EdgeClass::independent) continue;
    auto& t = m[static_cast<std::size_t>(meta.edge)];
    t = testing::random_table(t.scope(), p.alphabet(), rng, 0.05, 1.0);
    normalize_message(t);
  }
  return m;
}

Verdict oracle_equivalence() {
  std::mt19937 rng(1);
  double worst = 0.0;
  int models = 0, edges = 0;
  for (; models < 150; ++models) {
    const Problem p = testing::random_problem(rng, 6, 3);
    const MessageSet m = random_messages(p, rng);
    for (const auto& meta : p.edges) {
      worst = std::max(worst, testing::max_rel_diff(gbp_update_edge(m, meta, p),
                                                    oracle::reference_update(m, meta.edge, p.graph, p.model)));
      ++edges;
    }
  }
  return {worst <= 1e-12, fmt("%.0f models, %.0f edges, max rel err %.2e", models, edges, worst)};
}

Verdict tree_exactness() {
  std::mt19937 rng(2);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const int d = std::uniform_int_distribution<int>(2, 4)(rng);
    Model model = build_model(testing::random_tree_model(n, d, rng));
    RegionGraph graph = build_region_graph(make_bethe_regions(model), model);
    const Problem p = make_problem(std::move(model), std::move(graph));
    const auto fp = run_to_fixed_point(p, initial_messages(p), 1e-14, 5000);
    if (!fp.converged) return {false, "GBP did not converge on a tree"};
    std::vector<Scope> singles;
    for (int v = 0; v < n; ++v) singles.push_back({v});
    const auto ex = oracle::exact_marginals(p.model, singles);
    for (int v = 0; v < n; ++v)
      worst = std::max(worst, (variable_belief(p, fp.messages, v).values() - ex.marginals[static_cast<std::size_t>(v)].values())
                                  .cwiseAbs()
                                  .maxCoeff());
  }
  return {worst <= 1e-9, fmt("10 trees, max abs err %.2e", worst)};
}

Verdict unbiasedness() {
  std::mt19937 rng(3);
  double worst = 0.0;
  int edges = 0;
  auto exhaustive = [&](const Problem& p) {
    const int d = p.alphabet();
    const MessageSet m = random_messages(p, rng);
    for (const auto& meta : p.edges) {
      if (meta.edge_class != EdgeClass::stochastic || meta.sampled.size() > 2) continue;
      const QTables qk = build_q_and_k(mhat(m, meta, d), meta, d);
      const auto cond = conditioning_of(meta, d);
      FactorTable expect(meta.child_vars, d, 0.0);
      for (Index s = 0; s < qk.q.cols(); ++s) {
        std::vector<Index> samples(static_cast<std::size_t>(qk.k.size()), s);
        const FactorTable y = stochastic_innovation(meta, qk, samples, d);
        for (Index r = 0; r < y.size(); ++r) expect[r] += qk.q(cond[static_cast<std::size_t>(r)], s) * y[r];
      }
      worst = std::max(worst, testing::max_rel_diff(expect, gbp_update_unnormalized(m, meta, d)));
      ++edges;
    }
  };
  for (int i = 0; i < 60; ++i) exhaustive(testing::random_problem(rng, 6, 3));
  for (int d : {2, 3}) {
    exhaustive(testing::grid_fixture(d));
    exhaustive(gain_two_problem(d));
  }

  // Monte Carlo on the d = 4 Potts grid.
  const Problem p = testing::grid_fixture(4);
  const MessageSet m = random_messages(p, rng);
  int entries = 0, outside = 0;
  double worst_z = 0.0;
  for (const char* label : {"1245:45", "45:5"}) {
    const std::string l(label);
    const auto& meta = p.edges[static_cast<std::size_t>(testing::edge_by_label(p, l.substr(0, l.find(':')), l.substr(l.find(':') + 1)))];
    const QTables qk = build_q_and_k(mhat(m, meta, 4), meta, 4);
    const FactorTable gbp = gbp_update_unnormalized(m, meta, 4);
    std::vector<std::discrete_distribution<Index>> slices;
    for (Index c = 0; c < qk.q.rows(); ++c) {
      const Eigen::VectorXd row = qk.q.row(c).transpose();
      slices.emplace_back(row.data(), row.data() + row.size());
    }
    std::mt19937_64 gen(4);
    const int n = 100000;
    Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(gbp.size()), sq = sum;
    std::vector<Index> samples(slices.size());
    for (int i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < slices.size(); ++c) samples[c] = slices[c](gen);
      const Eigen::ArrayXd y = stochastic_innovation(meta, qk, samples, 4).values().array();
      sum += y;
      sq += y.square();
    }
    const Eigen::ArrayXd mean = sum / n;
    const Eigen::ArrayXd se = ((sq / n - mean.square()) / (n - 1)).sqrt();
    for (Index r = 0; r < gbp.size(); ++r) {
      const double z = std::abs(mean[r] - gbp[r]) / se[r];
      worst_z = std::max(worst_z, z);
      ++entries;
      if (z > 3.0) ++outside;
    }
  }
  return {worst <= 1e-12 && outside == 0,
          fmt("exhaustive on %.0f edges max rel err %.2e; Monte Carlo 1e5 samples, %.0f entries, max |z| %.2f", edges,
              worst, entries, worst_z)};
}

Verdict complexity_verdicts() {
  const Problem fixture = gain_two_problem(2);
  const std::string report = analyze_report(fixture);
  std::string row;
  std::istringstream lines(report);
  for (std::string line; std::getline(lines, line);)
    if (line.rfind("123456->36", 0) == 0) row = line;
  std::string compact;
  for (char c : row)
    if (c != ' ') compact += c;
  const bool gain_two = compact == "123456->36|E3|6|2|4|2|reduces";

  std::mt19937 rng(5);
  int non_top = 0, bad = 0;
  for (int i = 0; i < 50; ++i) {
    const Problem p = testing::random_problem(rng);
    for (const auto& m : p.edges) {
      if (p.graph.is_top(m.parent)) continue;
      ++non_top;
      if (!scope_includes(m.t_scope, m.eliminated) || m.gain != 0 || m.reduces_complexity) ++bad;
    }
  }
  return {gain_two && bad == 0 && non_top > 0,
          std::string("analyze row '") + row + "'; " + fmt("%.0f non-top edges on 50 graphs, %.0f violations", non_top, bad)};
}

struct ConvergenceRun {
  AveragedTrace avg;
  std::string csv;
  double unaligned_final = 0.0;
  int gauge_dimension = 0;
};

ConvergenceRun convergence_run(const Problem& p, const MessageSet& ref) {
  SgbpOptions o{StepSchedule::harmonic(), 10000, 1};
  const auto runs = sgbp_run_seeds(p, o, 20, &ref);
  ConvergenceRun out;
  out.avg = average_traces(runs);
  std::ostringstream os;
  os << std::setprecision(17);
  io::write_trace_csv(os, out.avg, false);
  for (const auto& r : runs) {
    out.unaligned_final += r.unaligned_delta_not1 / static_cast<double>(runs.size());
    // Per-run rows too, without the wall-clock column.
    for (const auto& row : r.rows)
      os << row.iter << ',' << row.delta_not1 << ',' << row.delta_full << ',' << row.ops_actual << '\n';
  }
  out.csv = os.str();
  out.gauge_dimension = runs.front().gauge_dimension;
  return out;
}

}  // namespace

int main() {
  std::printf("acceptance: 8 criteria\n");
  run(1, "oracle equivalence", oracle_equivalence);
  run(2, "exactness on trees", tree_exactness);
  run(3, "unbiased innovation", unbiasedness);
  run(4, "complexity verdicts", complexity_verdicts);

  const Problem grid4 = potts_cluster_problem({3, 3, 0.1, 0.1, 0.1, 0}, 4);
  const auto fp = reference_fixed_point(grid4);
  ConvergenceRun first;
  run(5, "convergence (d=4, 20 seeds)", [&]() -> Verdict {
    if (!fp.converged) return {false, "no GBP fixed point"};
    first = convergence_run(grid4, fp.messages);
    const auto& a = first.avg;
    const double d0 = a.mean_delta0_not1, dT = a.mean_delta_not1.back();
    std::vector<double> x, y;
    double worst_uptick = 0.0;
    for (std::size_t i = 0; i < a.iter.size(); ++i) {
      if (a.iter[i] >= 1000) {
        x.push_back(static_cast<double>(a.iter[i]));
        y.push_back(a.mean_delta_not1[i]);
      }
      if (a.iter[i] >= 100 && i + 1 < a.iter.size())
        worst_uptick = std::max(worst_uptick, a.mean_delta_not1[i + 1] / a.mean_delta_not1[i]);
    }
    const double slope = loglog_slope(x, y);
    const bool ok = dT * 10.0 <= d0 && std::abs(slope + 1.0) <= 0.25 && worst_uptick <= 1.05;
    return {ok, fmt("delta0 %.3e, delta(1e4) %.3e, slope %.3f, largest step ratio %.4f", d0, dT, slope, worst_uptick) +
                    fmt("; gauge dim %.0f, unaligned final delta %.3e", first.gauge_dimension, first.unaligned_final)};
  });

  run(6, "seeded determinism", [&]() -> Verdict {
    if (first.csv.empty()) return {false, "criterion 5 produced no trace"};
    const ConvergenceRun second = convergence_run(grid4, fp.messages);
    const bool same = second.csv == first.csv;
    return {same, fmt("%.0f bytes compared", static_cast<double>(first.csv.size())) + (same ? ", identical" : ", differ")};
  });

  run(7, "complexity scaling", []() -> Verdict {
    std::vector<double> ds, gbp_terms, gbp_total;
    for (int d : {2, 4, 8, 16}) {
      const Problem p = potts_cluster_problem({3, 3, 0.1, 0.1, 0.1, 0}, d);
      const auto& meta = p.edges[static_cast<std::size_t>(testing::edge_by_label(p, "1245", "45"))];
      OpCounts ops;
      gbp_update_edge(initial_messages(p), meta, p, &ops);
      ds.push_back(d);
      gbp_terms.push_back(static_cast<double>(ops.contraction));
      gbp_total.push_back(static_cast<double>(ops.total()));
    }
    const double e_gbp = loglog_slope(ds, gbp_terms);
    std::vector<double> dr, ratio;
    for (int d : {4, 8, 16}) {
      const Problem p = gain_two_problem(d);
      const int e = testing::edge_by_label(p, "123456", "36");
      OpCounts g, s;
      gbp_update_edge(initial_messages(p), p.edges[static_cast<std::size_t>(e)], p, &g);
      SgbpEngine engine(p, {StepSchedule::harmonic(), 0, 1});
      engine.update_edge(e, 1, 0.5, &s);
      dr.push_back(d);
      ratio.push_back(static_cast<double>(g.total()) / static_cast<double>(s.total()));
    }
    const double e_ratio = loglog_slope(dr, ratio);
    const bool ok = std::abs(e_gbp - 4.0) <= 0.1 && std::abs(e_ratio - 2.0) <= 0.2;
    return {ok, fmt("GBP contraction exponent %.3f (with mhat pass %.3f) over d=2..16; GBP/SGBP ratio exponent %.3f over "
                    "d=4..16, ratio %.1f at d=4",
                    e_gbp, loglog_slope(ds, gbp_total), e_ratio, ratio.front())};
  });

  run(8, "high-probability shape", [&]() -> Verdict {
    if (!fp.converged) return {false, "no GBP fixed point"};
    const LinearStability ls = linear_stability(grid4, fp.messages, message_gauge(grid4.graph, 4));
    const ContractionProbe probe = probe_contraction(grid4, fp.messages, 30, 1e-3, 8);
    const double nu = ls.nu;
    if (!(nu > 0.0)) return {false, fmt("nu-hat %.3f is not positive", nu)};
    const auto runs = sgbp_run_seeds(grid4, {StepSchedule::high_probability(nu), 10000, 1000}, 50, &fp.messages);
    auto constant = [&](long horizon) {
      std::vector<double> c;
      for (const auto& r : runs) {
        double best = 0.0;
        for (const auto& row : r.rows)
          if (row.iter >= 100 && row.iter <= horizon)
            best = std::max(best, row.delta_not1 * static_cast<double>(row.iter) / (1.0 + std::log(static_cast<double>(row.iter))));
        c.push_back(best);
      }
      std::sort(c.begin(), c.end());
      return c[static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(c.size()))) - 1];
    };
    const double c5 = constant(5000), c10 = constant(10000);
    const double r = std::max(c5, c10) / std::min(c5, c10);
    return {r <= 2.0, fmt("nu-hat %.3f (sampled Lipschitz %.2f), C(5e3) %.4g, C(1e4) %.4g, ratio %.3f", nu,
                          probe.max_ratio, c5, c10, r)};
  });

  std::printf("acceptance: %s (%d failed)\n", failures == 0 ? "PASS" : "FAIL", failures);
  return failures == 0 ? 0 : 1;
}

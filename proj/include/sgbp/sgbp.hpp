#pragma once

#include "sgbp/gbp.hpp"
#include "sgbp/schedule.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sgbp {

/// Conditional sampling tables of a stochastic (E3) edge at fixed messages.
/// Rows are conditioning values x_{T\(P\R)}, columns sampled values
/// x_{(P\R)∩T}, both in row-major order of their sorted scopes.
struct QTables {
  Eigen::MatrixXd q;  ///< Q(s | c), each row sums to 1 (zero rows where k(c) = 0)
  Eigen::VectorXd k;  ///< k_PR(c) = Σ_s M̂(s, c)
};

QTables build_q_and_k(const FactorTable& m_hat, const EdgeMetadata& meta, int alphabet);

/// Unnormalized stochastic innovation
///   Y(x_R) = k(c) Σ_{x_{(P\R)\T}} Φ_{P\R}(J_c, x_{(P\R)\T}, x_{P′\(P\R)})
/// with c the conditioning part of x_R and J_c = samples[c], the row-major
/// index of the sampled assignment for that conditioning value.
FactorTable stochastic_innovation(const EdgeMetadata& meta, const QTables& qk, std::span<const Index> samples,
                                  int alphabet, OpCounts* ops = nullptr);

/// Per-edge precomputation for the stochastic engine.
struct EdgeWorkspace {
  /// E2: Σ_{x_{P\R}} Φ_{P\R} as a table over R.
  FactorTable reduced_potential;
  /// E3: Σ_{x_{P\T}} Φ_{P\R} over T, so Σ_{x_R} E[Y](x_R) = Σ_T M̂·G.
  FactorTable mass_over_t;
};

struct SgbpOptions {
  StepSchedule schedule;
  long iterations = 0;
  std::uint64_t seed = 0;
  /// Checks every stochastic innovation against its convex-hull bounds
  /// (costs one dense pass per edge per iteration).
  bool check_bounds = false;
};

/// Errors are measured against the reference fixed point after moving it along
/// the message gauge to the iterate's gauge coordinates (see gauge.hpp); with a
/// trivial gauge this is the plain ‖m − m*‖² / ‖m*‖².
struct TraceRow {
  long iter = 0;
  double alpha = 0.0;
  double delta_not1 = 0.0;  ///< normalized squared error on E2 ∪ E3 edges
  double delta_full = 0.0;  ///< same over all edges
  std::uint64_t ops_gbp_equiv = 0;  ///< cumulative cost GBP would have paid
  std::uint64_t ops_actual = 0;     ///< cumulative cost actually paid
  std::int64_t wallclock_ns = 0;    ///< cumulative
};

struct RunTrace {
  std::vector<TraceRow> rows;
  bool has_reference = false;
  double delta0_not1 = 0.0;
  double delta0_full = 0.0;
  OpCounts ops;                 ///< totals over the run
  long bound_violations = 0;    ///< only counted with check_bounds
  int gauge_dimension = 0;
  double unaligned_delta_not1 = 0.0;  ///< final error against the reference as given
  MessageSet final_messages;
};

/// Stochastic GBP (one instance per run; not shared between threads).
class SgbpEngine {
 public:
  SgbpEngine(const Problem& problem, SgbpOptions options);

  /// Messages at t = 0: uniform, with E1 edges fixed to their constant update.
  const MessageSet& messages() const { return messages_; }
  void set_messages(MessageSet m) { messages_ = std::move(m); }

  /// One sweep at iteration t ≥ 1 (synchronous over all edges). Returns α^(t).
  double step(long t, OpCounts* ops = nullptr);

  /// New message for one edge from the current messages (not yet stored).
  FactorTable update_edge(int edge, long t, double alpha, OpCounts* ops = nullptr);

  RunTrace run(const MessageSet* reference);

  long bound_violations() const { return bound_violations_; }
  const EdgeWorkspace& workspace(int edge) const { return work_[static_cast<std::size_t>(edge)]; }

 private:
  const Problem& problem_;
  SgbpOptions options_;
  std::vector<EdgeWorkspace> work_;
  MessageSet messages_;
  long bound_violations_ = 0;
};

/// Cost of one GBP update of an edge, in the units of OpCounts::total().
std::uint64_t gbp_edge_ops(const EdgeMetadata& meta, int alphabet);

/// Edge indices of classes E2 and E3.
std::vector<int> non_independent_edges(const Problem& problem);

/// ‖a − b‖² / ‖b‖² restricted to `edges` (0 when the restriction is empty).
double normalized_sq_error(const MessageSet& a, const MessageSet& b, const std::vector<int>& edges);

RunTrace sgbp_run(const Problem& problem, const SgbpOptions& options, const MessageSet* reference);

/// Runs seeds base_seed, base_seed + 1, ... as independent jobs.
std::vector<RunTrace> sgbp_run_seeds(const Problem& problem, const SgbpOptions& options, int num_seeds,
                                     const MessageSet* reference, int max_threads = 0);

struct AveragedTrace {
  std::vector<long> iter;
  std::vector<double> alpha;
  std::vector<double> mean_delta_not1, var_delta_not1;
  std::vector<double> mean_delta_full;
  std::vector<double> mean_ops_gbp_equiv, mean_ops_actual, mean_wallclock_ns;
  double mean_delta0_not1 = 0.0;
  double mean_delta0_full = 0.0;
  int runs = 0;
};

/// Per-iteration averages over runs (summed in run order).
AveragedTrace average_traces(const std::vector<RunTrace>& runs);

}  // namespace sgbp

#pragma once

#include "sgbp/edge_metadata.hpp"
#include "sgbp/model.hpp"
#include "sgbp/region_graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace sgbp {

/// Entries below this value are raised to it after every normalization.
inline constexpr double kMessageFloor = 1e-12;

/// Model, region graph and per-edge metadata bundled for the engines.
struct Problem {
  Model model;
  RegionGraph graph;
  std::vector<EdgeMetadata> edges;

  int alphabet() const { return model.alphabet_size(); }
};

Problem make_problem(Model model, RegionGraph graph);

/// One table per region-graph edge (indexed like graph.edges()), each over the
/// child's variables and normalized to sum 1.
struct MessageSet {
  std::vector<FactorTable> tables;

  std::size_t size() const { return tables.size(); }
  FactorTable& operator[](std::size_t e) { return tables[e]; }
  const FactorTable& operator[](std::size_t e) const { return tables[e]; }

  /// Concatenated vector m ∈ R^Δ in edge order.
  Eigen::VectorXd flatten() const;
  /// Concatenation restricted to the selected edges.
  Eigen::VectorXd flatten(const std::vector<int>& edges) const;
};

/// Work counters, in inner-loop multiply-adds.
struct OpCounts {
  std::uint64_t mhat = 0;         ///< forming M̂ over T_PR, one per entry
  std::uint64_t contraction = 0;  ///< Σ over eliminated variables, one per term
  std::uint64_t sampling = 0;     ///< k_PR, and scanning Q slices to draw J

  std::uint64_t total() const { return mhat + contraction + sampling; }
  OpCounts& operator+=(const OpCounts& o) {
    mhat += o.mhat;
    contraction += o.contraction;
    sampling += o.sampling;
    return *this;
  }
};

MessageSet uniform_messages(const RegionGraph& graph, int alphabet);

/// Uniform messages, except independent (E1) edges which are set to their
/// constant update Σ_{x_{P\R}} Φ_{P\R}, normalized.
MessageSet initial_messages(const Problem& problem);

/// Normalizes to sum 1, floors entries at kMessageFloor and renormalizes.
/// Throws std::domain_error when the table sums to zero.
void normalize_message(FactorTable& t);

/// normalize((1 − α)·old + α·update); the shared mixing step of damped GBP and
/// SGBP.
FactorTable mix_messages(const FactorTable& old, const FactorTable& update, double alpha);

/// M̂ over T_PR: ∏_N m / ∏_D m (the scalar 1 when both sets are empty).
FactorTable mhat(const MessageSet& messages, const EdgeMetadata& meta, int alphabet, OpCounts* ops = nullptr);

/// Σ_{x_{P\R}} Φ_{P\R}(x_{P′}) M̂(x_{T_PR}) for every x_R, unnormalized.
FactorTable gbp_update_unnormalized(const MessageSet& messages, const EdgeMetadata& meta, int alphabet,
                                    OpCounts* ops = nullptr);

/// Normalized message update for one edge. Throws std::domain_error naming the
/// edge when the update is identically zero.
FactorTable gbp_update_edge(const MessageSet& messages, const EdgeMetadata& meta, const Problem& problem,
                            OpCounts* ops = nullptr);

enum class Schedule { synchronous, asynchronous };

struct IterateOptions {
  Schedule schedule = Schedule::synchronous;
  double damping = 0.0;  ///< λ in new ← (1 − λ)·new + λ·old, in [0, 1)
};

/// One application of the global update Υ. Synchronous updates read only the
/// previous iterate; asynchronous ones sweep edges top-down in place.
MessageSet gbp_iterate(const Problem& problem, const MessageSet& messages, const IterateOptions& options = {},
                       OpCounts* ops = nullptr);

struct FixedPointResult {
  MessageSet messages;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residuals;  ///< ‖Υ(m) − m‖₂ per iteration
};

FixedPointResult run_to_fixed_point(const Problem& problem, MessageSet messages, double tol, int max_iters,
                                    const IterateOptions& options = {});

/// The fixed point used as m* by experiments: top-down GBP with damping 0.5
/// from initial_messages to tolerance 1e-12. Undamped synchronous GBP
/// oscillates on the grid cluster graph (its Jacobian has eigenvalue −2).
FixedPointResult reference_fixed_point(const Problem& problem, int max_iters = 100000);

/// b_R ∝ Φ_R · ∏_{P ∈ P(R)} m_{P→R} · ∏_{D ∈ D(R)} ∏_{P′ ∈ P(D) \ E(R)} m_{P′→D}.
FactorTable compute_belief(const Problem& problem, const MessageSet& messages, int region);

/// Edges whose messages enter compute_belief for `region`.
std::vector<int> belief_edges(const RegionGraph& graph, int region);

/// Single-variable marginal read from the smallest region containing `var`.
FactorTable variable_belief(const Problem& problem, const MessageSet& messages, int var);

struct ContractionProbe {
  double max_ratio = 0.0;  ///< largest ‖Υ(m) − Υ(m′)‖₂ / ‖m − m′‖₂ observed
  double nu = 0.0;         ///< 2(1 − max_ratio)
};

/// Samples message pairs near `fixed_point` (relative perturbation `radius`)
/// and records the largest Lipschitz ratio of Υ.
ContractionProbe probe_contraction(const Problem& problem, const MessageSet& fixed_point, int samples, double radius,
                                   std::uint64_t seed);

}  // namespace sgbp

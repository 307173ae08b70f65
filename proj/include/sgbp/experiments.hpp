#pragma once

#include "sgbp/gbp.hpp"
#include "sgbp/model.hpp"
#include "sgbp/region_graph.hpp"
#include "sgbp/sgbp.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sgbp {

/// Potts grid with the overlapping 2×2 cluster region graph.
Problem potts_cluster_problem(const PottsParams& params, int d);

/// Eight-variable model whose edge 123456→36 has a message-dependent scope
/// {2,4} inside the eliminated set {1,2,4,5}. Regions (1-based labels):
/// 2478, 123456, 24, 36 with edges 2478→24, 123456→24, 123456→36.
/// Factor values are positive and drawn deterministically from `seed`.
ModelSpec gain_two_model(int d, std::uint64_t seed);
RegionGraphSpec gain_two_regions();
Problem gain_two_problem(int d, std::uint64_t seed = 7);

/// Per-edge complexity table followed by the graph summary.
std::string analyze_report(const Problem& problem);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Self-contained log-log line chart.
struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_loglog(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

struct ReproduceConfig {
  PottsParams potts{3, 3, 0.1, 0.1, 0.1, 0};
  std::vector<int> alphabets{4, 8, 16, 32};
  int seeds = 20;
  long iterations = 10000;
  std::uint64_t base_seed = 1;
  int threads = 0;
  int runtime_alphabet = 4;
  std::filesystem::path out_dir = "results";
};

struct ReproduceSummary {
  int d = 0;
  double delta0 = 0.0;
  double final_delta = 0.0;
  double tail_slope = 0.0;            ///< over the final decade of iterations
  double gbp_ops_per_iter = 0.0;
  double sgbp_ops_per_iter = 0.0;
};

/// GBP to m*, then SGBP with α = 2/(1+t) averaged over seeds, for each d.
/// Writes convergence_d<d>.csv, convergence.svg, runtime_d<d>.csv and
/// summary.csv into out_dir.
std::vector<ReproduceSummary> reproduce_convergence(const ReproduceConfig& config);

}  // namespace sgbp

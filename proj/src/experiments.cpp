#include "sgbp/experiments.hpp"

#include "sgbp/gauge.hpp"
#include "sgbp/io.hpp"
#include "sgbp/philox.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace sgbp {

Problem potts_cluster_problem(const PottsParams& params, int d) {
  Model model = build_model(make_potts(params, d));
  RegionGraph graph = build_region_graph(make_grid_cluster_regions(params.grid_rows, params.grid_cols, model), model);
  return make_problem(std::move(model), std::move(graph));
}

namespace {

std::string unary_id(int v) { return "phi" + std::to_string(v + 1); }
std::string pair_id(int u, int v) { return "psi" + std::to_string(u + 1) + std::to_string(v + 1); }

const std::vector<std::pair<int, int>>& gain_two_pairs() {
  // 1-based: 27 48 78 24 12 23 36 25 45 14 56
  static const std::vector<std::pair<int, int>> pairs{{1, 6}, {3, 7}, {6, 7}, {1, 3}, {0, 1}, {1, 2},
                                                      {2, 5}, {1, 4}, {3, 4}, {0, 3}, {4, 5}};
  return pairs;
}

}  // namespace

ModelSpec gain_two_model(int d, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("alphabet size must be at least 2");
  const Philox4x32 rng(seed);
  ModelSpec spec;
  spec.num_variables = 8;
  spec.alphabet_size = d;
  std::uint32_t slot = 0;
  auto draw = [&] { return 0.1 + 0.9 * rng.uniform({slot++, 0x67326669u, 0, 0}); };
  for (int v = 0; v < 8; ++v) {
    FactorTable t({v}, d, 1.0);
    for (Index i = 1; i < d; ++i) t[i] = draw();
    spec.factors.push_back({unary_id(v), std::move(t)});
  }
  for (auto [u, v] : gain_two_pairs()) {
    FactorTable t({u, v}, d, 1.0);
    for (Index i = 0; i < t.size(); ++i)
      if (i / d != i % d) t[i] = draw();
    spec.factors.push_back({pair_id(u, v), std::move(t)});
  }
  return spec;
}

RegionGraphSpec gain_two_regions() {
  auto ids = [](std::vector<int> unary, std::vector<std::pair<int, int>> pairs) {
    std::vector<std::string> out;
    for (int v : unary) out.push_back(unary_id(v));
    for (auto [u, v] : pairs) out.push_back(pair_id(u, v));
    return out;
  };
  RegionGraphSpec spec;
  spec.regions.push_back({"2478", {1, 3, 6, 7}, ids({1, 3, 6, 7}, {{1, 6}, {3, 7}, {6, 7}, {1, 3}})});
  spec.regions.push_back({"123456", {0, 1, 2, 3, 4, 5},
                          ids({0, 1, 2, 3, 4, 5}, {{0, 1}, {1, 2}, {2, 5}, {1, 4}, {3, 4}, {0, 3}, {4, 5}, {1, 3}})});
  spec.regions.push_back({"24", {1, 3}, ids({1, 3}, {{1, 3}})});
  spec.regions.push_back({"36", {2, 5}, ids({2, 5}, {{2, 5}})});
  spec.edges = {{"2478", "24"}, {"123456", "24"}, {"123456", "36"}};
  return spec;
}

Problem gain_two_problem(int d, std::uint64_t seed) {
  Model model = build_model(gain_two_model(d, seed));
  RegionGraph graph = build_region_graph(gain_two_regions(), model);
  return make_problem(std::move(model), std::move(graph));
}

std::string analyze_report(const Problem& problem) {
  const auto& g = problem.graph;
  std::vector<std::string> labels;
  std::size_t width = 4;
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    labels.push_back(g.edge_label(static_cast<int>(e)));
    width = std::max(width, labels.back().size());
  }
  std::ostringstream os;
  os << std::left << std::setw(static_cast<int>(width)) << "edge"
     << " | class | |P| | |T| | eta | I  | verdict\n";
  for (const auto& m : problem.edges) {
    os << std::left << std::setw(static_cast<int>(width)) << labels[static_cast<std::size_t>(m.edge)] << " | "
       << std::setw(5) << to_string(m.edge_class) << " | " << std::right << std::setw(3) << m.parent_vars.size()
       << " | " << std::setw(3) << m.t_scope.size() << " | " << std::setw(3) << m.eta << " | " << std::setw(2)
       << m.gain << " | " << (m.reduces_complexity ? "reduces" : "no gain") << '\n';
  }
  const auto s = summarize(g, problem.edges);
  os << "A_max = " << s.a_max << "  (GBP per-iteration cost O(d^" << s.a_max << "))\n";
  os << "SGBP dominant exponent = " << s.sgbp_exponent << "  (gain d^" << s.dominant_gain << ")\n";
  return os.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("log-log fit needs positive data");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw std::domain_error("degenerate abscissae in slope fit");
  return (n * sxy - sx * sy) / den;
}

std::string svg_loglog(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  constexpr double W = 720, H = 480, L = 80, R = 150, T = 40, B = 60;
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0, ymin = xmin, ymax = 0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
  if (!(xmax > 0)) xmin = 1, xmax = 10, ymin = 1, ymax = 10;
  const double lx0 = std::floor(std::log10(xmin)), lx1 = std::max(lx0 + 1, std::ceil(std::log10(xmax)));
  const double ly0 = std::floor(std::log10(ymin)), ly1 = std::max(ly0 + 1, std::ceil(std::log10(ymax)));
  auto px = [&](double x) { return L + (std::log10(x) - lx0) / (lx1 - lx0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (std::log10(y) - ly0) / (ly1 - ly0) * (H - T - B); };

  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
  for (double e = lx0; e <= lx1; ++e) {
    const double x = L + (e - lx0) / (lx1 - lx0) * (W - L - R);
    os << "<line x1=\"" << x << "\" y1=\"" << T << "\" x2=\"" << x << "\" y2=\"" << H - B
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << x << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\">1e"
       << static_cast<int>(e) << "</text>\n";
  }
  for (double e = ly0; e <= ly1; ++e) {
    const double y = H - B - (e - ly0) / (ly1 - ly0) * (H - T - B);
    os << "<line x1=\"" << L << "\" y1=\"" << y << "\" x2=\"" << W - R << "\" y2=\"" << y
       << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e"
       << static_cast<int>(e) << "</text>\n";
  }
  os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (W - R + L) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << x_label
     << "</text>\n";
  os << "<text transform=\"translate(20," << (H - B + T) / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
     << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* c = colors[k % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < series[k].x.size(); ++i)
      if (series[k].x[i] > 0 && series[k].y[i] > 0) os << px(series[k].x[i]) << ',' << py(series[k].y[i]) << ' ';
    os << "\"/>\n";
    const double ly = T + 20 + 20 * static_cast<double>(k);
    os << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">"
       << series[k].label << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

namespace {

// Thins a trace to about 60 points per decade for plotting.
PlotSeries thin_series(const std::string& label, const AveragedTrace& avg) {
  PlotSeries s{label, {}, {}};
  double next = 1.0;
  for (std::size_t i = 0; i < avg.iter.size(); ++i) {
    const double t = static_cast<double>(avg.iter[i]);
    if (t + 1e-9 < next && i + 1 != avg.iter.size()) continue;
    s.x.push_back(t);
    s.y.push_back(avg.mean_delta_not1[i]);
    next = std::max(t + 1.0, t * std::pow(10.0, 1.0 / 60.0));
  }
  return s;
}

std::string number(double x) {
  std::ostringstream s;
  s << std::setprecision(10) << x;
  return s.str();
}

// First wall-clock time at which each error level is reached, for GBP (the
// damped top-down schedule used for m*) and for the averaged SGBP trace.
std::string runtime_comparison(const Problem& problem, const MessageSet& m_star, const AveragedTrace& sgbp) {
  using clock = std::chrono::steady_clock;
  const std::vector<int> not1 = non_independent_edges(problem);
  const MessageGauge gauge = message_gauge(problem.graph, problem.alphabet());
  auto delta = [&](const MessageSet& m) { return normalized_sq_error(m, gauge_align(gauge, m_star, m), not1); };
  std::vector<double> gbp_delta{delta(initial_messages(problem))};
  std::vector<double> gbp_ns{0.0};
  MessageSet m = initial_messages(problem);
  const auto start = clock::now();
  for (int it = 1; it <= 10000 && gbp_delta.back() > 1e-12; ++it) {
    m = gbp_iterate(problem, m, {Schedule::asynchronous, 0.5});
    gbp_ns.push_back(static_cast<double>(std::chrono::duration_cast<std::chrono::nanoseconds>(clock::now() - start).count()));
    gbp_delta.push_back(delta(m));
  }

  std::ostringstream os;
  os << "target_delta,gbp_iters,gbp_wallclock_ns,sgbp_iters,sgbp_wallclock_ns\n";
  for (double target = 1e-1; target >= 1e-8; target /= 10.0) {
    std::string gi = "", gw = "", si = "", sw = "";
    for (std::size_t i = 0; i < gbp_delta.size(); ++i)
      if (gbp_delta[i] <= target) {
        gi = std::to_string(i);
        gw = number(gbp_ns[i]);
        break;
      }
    for (std::size_t i = 0; i < sgbp.iter.size(); ++i)
      if (sgbp.mean_delta_not1[i] <= target) {
        si = std::to_string(sgbp.iter[i]);
        sw = number(sgbp.mean_wallclock_ns[i]);
        break;
      }
    os << number(target) << ',' << gi << ',' << gw << ',' << si << ',' << sw << '\n';
  }
  return os.str();
}

}  // namespace

std::vector<ReproduceSummary> reproduce_convergence(const ReproduceConfig& config) {
  validate(config.potts);
  if (config.seeds < 1) throw std::invalid_argument("need at least one seed");
  if (config.iterations < 10) throw std::invalid_argument("need at least 10 iterations");
  std::filesystem::create_directories(config.out_dir);

  std::vector<ReproduceSummary> summaries;
  std::vector<PlotSeries> plot;
  for (int d : config.alphabets) {
    const Problem problem = potts_cluster_problem(config.potts, d);
    const FixedPointResult fp = reference_fixed_point(problem);
    if (!fp.converged) throw std::runtime_error("GBP did not converge at d = " + std::to_string(d));

    SgbpOptions opts;
    opts.schedule = StepSchedule::harmonic();
    opts.iterations = config.iterations;
    opts.seed = config.base_seed;
    const auto runs = sgbp_run_seeds(problem, opts, config.seeds, &fp.messages, config.threads);
    const AveragedTrace avg = average_traces(runs);

    std::ofstream csv(config.out_dir / ("convergence_d" + std::to_string(d) + ".csv"));
    io::write_trace_csv(csv, avg);
    plot.push_back(thin_series("d = " + std::to_string(d), avg));

    if (d == config.runtime_alphabet)
      io::write_file(config.out_dir / ("runtime_d" + std::to_string(d) + ".csv"),
                     runtime_comparison(problem, fp.messages, avg));

    ReproduceSummary s;
    s.d = d;
    s.delta0 = avg.mean_delta0_not1;
    s.final_delta = avg.mean_delta_not1.back();
    std::vector<double> xs, ys;
    const long lo = std::max(1L, config.iterations / 10);
    for (std::size_t i = 0; i < avg.iter.size(); ++i)
      if (avg.iter[i] >= lo) {
        xs.push_back(static_cast<double>(avg.iter[i]));
        ys.push_back(avg.mean_delta_not1[i]);
      }
    s.tail_slope = loglog_slope(xs, ys);
    const double iters = static_cast<double>(config.iterations);
    s.gbp_ops_per_iter = avg.mean_ops_gbp_equiv.back() / iters;
    s.sgbp_ops_per_iter = avg.mean_ops_actual.back() / iters;
    summaries.push_back(s);
  }

  io::write_file(config.out_dir / "convergence.svg",
                 svg_loglog(plot, "SGBP on a 3x3 Potts grid, mean over " + std::to_string(config.seeds) + " runs",
                            "iteration t", "normalized squared error"));
  std::ostringstream sum;
  sum << "d,delta0,final_delta,tail_slope,gbp_ops_per_iter,sgbp_ops_per_iter,ops_ratio\n";
  for (const auto& s : summaries)
    sum << s.d << ',' << number(s.delta0) << ',' << number(s.final_delta) << ',' << number(s.tail_slope) << ','
        << number(s.gbp_ops_per_iter) << ',' << number(s.sgbp_ops_per_iter) << ','
        << number(s.gbp_ops_per_iter / s.sgbp_ops_per_iter) << '\n';
  io::write_file(config.out_dir / "summary.csv", sum.str());
  return summaries;
}

}  // namespace sgbp

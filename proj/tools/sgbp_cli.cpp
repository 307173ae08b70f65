#include "sgbp/experiments.hpp"
#include "sgbp/io.hpp"
#include "sgbp/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace sgbp;

void fail_json(const std::string& command, const std::string& kind, const std::string& message) {
  nlohmann::json j{{"error", kind}, {"message", message}};
  if (!command.empty()) j["command"] = command;
  std::cerr << j.dump() << '\n';
}

Problem load_problem(const std::string& model_path, const std::string& regions_path) {
  Model model = build_model(io::load_model(model_path));
  RegionGraph graph = build_region_graph(io::load_regions(regions_path), model);
  return make_problem(std::move(model), std::move(graph));
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    io::write_file(path, text);
}

std::vector<Scope> parse_subsets(const std::string& text, int n) {
  std::vector<Scope> out;
  if (text.empty()) {
    for (int v = 0; v < n; ++v) out.push_back({v});
    return out;
  }
  std::stringstream groups(text);
  std::string group;
  while (std::getline(groups, group, ';')) {
    Scope s;
    std::stringstream items(group);
    std::string item;
    while (std::getline(items, item, ',')) s.push_back(std::stoi(item));
    std::sort(s.begin(), s.end());
    if (s.empty() || std::adjacent_find(s.begin(), s.end()) != s.end() || s.front() < 0 || s.back() >= n)
      throw std::invalid_argument("bad subset '" + group + "'");
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parent-to-child generalized belief propagation and its stochastic variant"};
  app.require_subcommand(1);
  std::string active;

  // potts
  PottsParams potts;
  int potts_d = 4;
  std::string potts_out;
  auto* c_potts = app.add_subcommand("potts", "Generate a grid Potts model");
  c_potts->add_option("--rows", potts.grid_rows)->capture_default_str();
  c_potts->add_option("--cols", potts.grid_cols)->capture_default_str();
  c_potts->add_option("--gamma", potts.gamma)->capture_default_str();
  c_potts->add_option("--mu", potts.mu)->capture_default_str();
  c_potts->add_option("--sigma", potts.sigma)->capture_default_str();
  c_potts->add_option("--seed", potts.seed)->capture_default_str();
  c_potts->add_option("-d,--alphabet", potts_d)->capture_default_str();
  c_potts->add_option("--out", potts_out, "Model JSON (stdout when omitted)");

  // regions-grid
  std::string rg_model, rg_out;
  int rg_rows = 3, rg_cols = 3;
  bool rg_bethe = false;
  auto* c_rg = app.add_subcommand("regions-grid", "Build the overlapping 2x2 cluster region graph for a grid model");
  c_rg->add_option("--model", rg_model)->required()->check(CLI::ExistingFile);
  c_rg->add_option("--rows", rg_rows)->capture_default_str();
  c_rg->add_option("--cols", rg_cols)->capture_default_str();
  c_rg->add_flag("--bethe", rg_bethe, "Emit Bethe regions instead");
  c_rg->add_option("--out", rg_out);

  // analyze
  std::string an_model, an_regions;
  bool an_json = false;
  auto* c_an = app.add_subcommand("analyze", "Per-edge classification and complexity report");
  c_an->add_option("--model", an_model)->required()->check(CLI::ExistingFile);
  c_an->add_option("--regions", an_regions)->required()->check(CLI::ExistingFile);
  c_an->add_flag("--json", an_json, "Machine-readable output");

  // gbp
  std::string gb_model, gb_regions, gb_out, gb_residuals;
  double gb_tol = 1e-10, gb_damping = 0.0;
  int gb_max_iters = 10000;
  bool gb_async = false;
  auto* c_gbp = app.add_subcommand("gbp", "Run GBP to a fixed point");
  c_gbp->add_option("--model", gb_model)->required()->check(CLI::ExistingFile);
  c_gbp->add_option("--regions", gb_regions)->required()->check(CLI::ExistingFile);
  c_gbp->add_option("--tol", gb_tol)->capture_default_str();
  c_gbp->add_option("--max-iters", gb_max_iters)->capture_default_str();
  c_gbp->add_option("--damping", gb_damping)->capture_default_str();
  c_gbp->add_flag("--async", gb_async, "Top-down in-place sweeps");
  c_gbp->add_option("--out", gb_out, "Messages and beliefs JSON");
  c_gbp->add_option("--residuals", gb_residuals, "Residual CSV");

  // sgbp
  std::string sg_model, sg_regions, sg_schedule = "paper", sg_reference, sg_out, sg_messages;
  double sg_alpha = 1.5, sg_nu = 1.0;
  long sg_iters = 10000;
  int sg_seeds = 1, sg_threads = 0;
  std::uint64_t sg_seed = 1;
  bool sg_no_wallclock = false;
  auto* c_sg = app.add_subcommand("sgbp", "Run stochastic GBP and record the error trace");
  c_sg->add_option("--model", sg_model)->required()->check(CLI::ExistingFile);
  c_sg->add_option("--regions", sg_regions)->required()->check(CLI::ExistingFile);
  c_sg->add_option("--schedule", sg_schedule, "paper | msbound | hp | custom:<expr in t, nu, alpha>")
      ->capture_default_str();
  c_sg->add_option("--alpha", sg_alpha)->capture_default_str();
  c_sg->add_option("--nu", sg_nu)->capture_default_str();
  c_sg->add_option("--iters", sg_iters)->capture_default_str();
  c_sg->add_option("--seeds", sg_seeds, "Independent runs to average")->capture_default_str();
  c_sg->add_option("--seed", sg_seed, "Base seed")->capture_default_str();
  c_sg->add_option("--threads", sg_threads);
  c_sg->add_option("--reference", sg_reference, "Fixed-point messages JSON (computed when omitted)");
  c_sg->add_option("--out", sg_out, "Trace CSV (stdout when omitted)");
  c_sg->add_option("--messages", sg_messages, "Final messages JSON of the first run");
  c_sg->add_flag("--no-wallclock", sg_no_wallclock, "Drop the wall-clock column");

  // exact
  std::string ex_model, ex_subsets, ex_out;
  auto* c_ex = app.add_subcommand("exact", "Exact marginals by enumeration");
  c_ex->add_option("--model", ex_model)->required()->check(CLI::ExistingFile);
  c_ex->add_option("--subsets", ex_subsets, "e.g. \"0;1;0,1\" (0-based; default: every variable)");
  c_ex->add_option("--out", ex_out);

  // reproduce
  ReproduceConfig rc;
  std::string rc_out = "results";
  auto* c_rep = app.add_subcommand("reproduce", "Potts-grid convergence study");
  c_rep->add_option("--out-dir", rc_out)->capture_default_str();
  c_rep->add_option("--alphabets", rc.alphabets)->delimiter(',')->capture_default_str();
  c_rep->add_option("--seeds", rc.seeds)->capture_default_str();
  c_rep->add_option("--iters", rc.iterations)->capture_default_str();
  c_rep->add_option("--seed", rc.base_seed)->capture_default_str();
  c_rep->add_option("--model-seed", rc.potts.seed)->capture_default_str();
  c_rep->add_option("--threads", rc.threads);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail_json("", "usage", e.what());
    return 2;
  }

  for (auto* sub : app.get_subcommands()) active = sub->get_name();
  try {
    if (*c_potts) {
      validate(potts);
      write_or_print(potts_out, io::model_to_json(make_potts(potts, potts_d)) + "\n");
    } else if (*c_rg) {
      const Model model = build_model(io::load_model(rg_model));
      const RegionGraphSpec spec = rg_bethe ? make_bethe_regions(model) : make_grid_cluster_regions(rg_rows, rg_cols, model);
      build_region_graph(spec, model);
      write_or_print(rg_out, io::regions_to_json(spec) + "\n");
    } else if (*c_an) {
      const Problem p = load_problem(an_model, an_regions);
      if (!an_json) {
        std::cout << analyze_report(p);
      } else {
        nlohmann::json j;
        j["edges"] = nlohmann::json::array();
        for (const auto& m : p.edges)
          j["edges"].push_back({{"edge", p.graph.edge_label(m.edge)},
                                {"class", std::string(to_string(m.edge_class))},
                                {"parent_size", m.parent_vars.size()},
                                {"t_size", m.t_scope.size()},
                                {"eta", m.eta},
                                {"gain", m.gain},
                                {"reduces_complexity", m.reduces_complexity}});
        const auto s = summarize(p.graph, p.edges);
        j["a_max"] = s.a_max;
        j["sgbp_exponent"] = s.sgbp_exponent;
        std::cout << j.dump(1) << '\n';
      }
    } else if (*c_gbp) {
      if (gb_damping < 0.0 || gb_damping >= 1.0) throw std::invalid_argument("damping must lie in [0, 1)");
      const Problem p = load_problem(gb_model, gb_regions);
      IterateOptions opt{gb_async ? Schedule::asynchronous : Schedule::synchronous, gb_damping};
      const auto res = run_to_fixed_point(p, initial_messages(p), gb_tol, gb_max_iters, opt);
      if (!gb_out.empty()) io::write_file(gb_out, io::messages_to_json(p, res.messages, true) + "\n");
      if (!gb_residuals.empty()) {
        std::ostringstream os;
        io::write_residuals_csv(os, res.residuals);
        io::write_file(gb_residuals, os.str());
      }
      std::cout << nlohmann::json{{"converged", res.converged},
                                  {"iterations", res.iterations},
                                  {"final_residual", res.residuals.empty() ? 0.0 : res.residuals.back()}}
                       .dump()
                << '\n';
      if (!res.converged) {
        fail_json(active, "not_converged", "no fixed point within " + std::to_string(gb_max_iters) + " iterations");
        return 3;
      }
    } else if (*c_sg) {
      if (sg_seeds < 1) throw std::invalid_argument("--seeds must be at least 1");
      const Problem p = load_problem(sg_model, sg_regions);
      MessageSet reference;
      if (!sg_reference.empty()) {
        reference = io::load_messages(p, sg_reference);
      } else {
        auto fp = reference_fixed_point(p);
        if (!fp.converged) throw std::runtime_error("GBP did not converge; pass --reference");
        reference = std::move(fp.messages);
      }
      SgbpOptions opt;
      opt.schedule = StepSchedule::parse(sg_schedule, sg_alpha, sg_nu);
      opt.iterations = sg_iters;
      opt.seed = sg_seed;
      const auto runs = sgbp_run_seeds(p, opt, sg_seeds, &reference, sg_threads);
      std::ostringstream os;
      io::write_trace_csv(os, average_traces(runs), !sg_no_wallclock);
      write_or_print(sg_out, os.str());
      if (!sg_messages.empty()) io::write_file(sg_messages, io::messages_to_json(p, runs.front().final_messages, true) + "\n");
    } else if (*c_ex) {
      const Model model = build_model(io::load_model(ex_model));
      const auto res = oracle::exact_marginals(model, parse_subsets(ex_subsets, model.num_variables()));
      write_or_print(ex_out, io::marginals_to_json(res) + "\n");
    } else if (*c_rep) {
      rc.out_dir = rc_out;
      const auto summaries = reproduce_convergence(rc);
      for (const auto& s : summaries)
        std::cout << "d=" << s.d << "  delta0=" << s.delta0 << "  final=" << s.final_delta
                  << "  tail slope=" << s.tail_slope << "  ops ratio=" << s.gbp_ops_per_iter / s.sgbp_ops_per_iter
                  << '\n';
      std::cout << "wrote " << rc.out_dir.string() << '\n';
    }
  } catch (const io::IoError& e) {
    fail_json(active, "io", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    fail_json(active, "invalid_argument", e.what());
    return 1;
  } catch (const std::domain_error& e) {
    fail_json(active, "numerical", e.what());
    return 1;
  } catch (const std::exception& e) {
    fail_json(active, "runtime", e.what());
    return 1;
  }
  return 0;
}

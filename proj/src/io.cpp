#include "sgbp/io.hpp"

#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace sgbp::io {

using nlohmann::json;

namespace {

json table_values(const FactorTable& t) {
  return json(std::vector<double>(t.values().data(), t.values().data() + t.size()));
}

Eigen::VectorXd values_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid ") + what + " JSON: " + e.what());
  }
}

template <class Fn>
auto guarded(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed ") + what + ": " + e.what());
  }
}

void put_row(std::ostream& os, std::initializer_list<std::string> cells) {
  bool first = true;
  for (const auto& c : cells) {
    if (!first) os << ',';
    os << c;
    first = false;
  }
  os << '\n';
}

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
}

std::string model_to_json(const ModelSpec& spec) {
  json j;
  j["num_variables"] = spec.num_variables;
  j["alphabet_size"] = spec.alphabet_size;
  j["factors"] = json::array();
  for (const auto& f : spec.factors)
    j["factors"].push_back({{"id", f.id}, {"variables", f.variables()}, {"values", table_values(f.table)}});
  return j.dump(1);
}

ModelSpec model_from_json(const std::string& text) {
  const json j = parse(text, "model");
  return guarded("model", [&] {
    ModelSpec spec;
    spec.num_variables = j.at("num_variables").get<int>();
    spec.alphabet_size = j.at("alphabet_size").get<int>();
    if (spec.alphabet_size < 1) throw IoError("alphabet_size must be positive");
    for (const auto& f : j.at("factors")) {
      Scope vars = f.at("variables").get<Scope>();
      if (!is_sorted_unique(vars)) throw IoError("factor variables must be sorted and distinct");
      spec.factors.push_back({f.at("id").get<std::string>(),
                              FactorTable(std::move(vars), spec.alphabet_size, values_from(f.at("values")))});
    }
    return spec;
  });
}

void save_model(const std::filesystem::path& path, const ModelSpec& spec) { write_file(path, model_to_json(spec)); }
ModelSpec load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

std::string regions_to_json(const RegionGraphSpec& spec) {
  json j;
  j["regions"] = json::array();
  for (const auto& r : spec.regions) j["regions"].push_back({{"id", r.id}, {"variables", r.variables}, {"factors", r.factors}});
  j["edges"] = json::array();
  for (const auto& [p, c] : spec.edges) j["edges"].push_back({p, c});
  return j.dump(1);
}

RegionGraphSpec regions_from_json(const std::string& text) {
  const json j = parse(text, "region");
  return guarded("region file", [&] {
    RegionGraphSpec spec;
    for (const auto& r : j.at("regions"))
      spec.regions.push_back({r.at("id").get<std::string>(), r.at("variables").get<std::vector<int>>(),
                              r.at("factors").get<std::vector<std::string>>()});
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw IoError("each edge must be a [parent, child] pair");
      spec.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return spec;
  });
}

void save_regions(const std::filesystem::path& path, const RegionGraphSpec& spec) {
  write_file(path, regions_to_json(spec));
}
RegionGraphSpec load_regions(const std::filesystem::path& path) { return regions_from_json(read_file(path)); }

std::string messages_to_json(const Problem& problem, const MessageSet& messages, bool with_beliefs) {
  const auto& g = problem.graph;
  json j;
  j["alphabet_size"] = problem.alphabet();
  j["messages"] = json::array();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto& edge = g.edges()[e];
    j["messages"].push_back({{"parent", g.region(edge.parent).id},
                             {"child", g.region(edge.child).id},
                             {"variables", messages[e].scope()},
                             {"values", table_values(messages[e])}});
  }
  if (with_beliefs) {
    j["beliefs"] = json::array();
    for (std::size_t r = 0; r < g.num_regions(); ++r) {
      const FactorTable b = compute_belief(problem, messages, static_cast<int>(r));
      j["beliefs"].push_back({{"region", g.regions()[r].id}, {"variables", b.scope()}, {"values", table_values(b)}});
    }
  }
  return j.dump(1);
}

MessageSet messages_from_json(const Problem& problem, const std::string& text) {
  const json j = parse(text, "messages");
  return guarded("messages", [&] {
    const auto& g = problem.graph;
    MessageSet out = uniform_messages(g, problem.alphabet());
    std::vector<bool> seen(g.num_edges(), false);
    for (const auto& m : j.at("messages")) {
      const int p = g.region_index(m.at("parent").get<std::string>());
      const int c = g.region_index(m.at("child").get<std::string>());
      const int e = p < 0 || c < 0 ? -1 : g.edge_index(p, c);
      if (e < 0) throw IoError("message for unknown edge " + m.at("parent").get<std::string>() + "->" +
                               m.at("child").get<std::string>());
      out[static_cast<std::size_t>(e)] =
          FactorTable(m.at("variables").get<Scope>(), problem.alphabet(), values_from(m.at("values")));
      if (out[static_cast<std::size_t>(e)].scope() != g.region(c).variables)
        throw IoError("message scope does not match child region on edge " + g.edge_label(e));
      seen[static_cast<std::size_t>(e)] = true;
    }
    for (std::size_t e = 0; e < seen.size(); ++e)
      if (!seen[e]) throw IoError("missing message for edge " + g.edge_label(static_cast<int>(e)));
    return out;
  });
}

MessageSet load_messages(const Problem& problem, const std::filesystem::path& path) {
  return messages_from_json(problem, read_file(path));
}

std::string marginals_to_json(const oracle::ExactResult& result) {
  json j;
  j["partition_function"] = result.partition_function;
  j["marginals"] = json::array();
  for (const auto& m : result.marginals) j["marginals"].push_back({{"variables", m.scope()}, {"values", table_values(m)}});
  return j.dump(1);
}

void write_residuals_csv(std::ostream& os, const std::vector<double>& residuals) {
  os << "iter,residual_l2\n";
  for (std::size_t i = 0; i < residuals.size(); ++i) put_row(os, {std::to_string(i + 1), num(residuals[i])});
}

void write_trace_csv(std::ostream& os, const RunTrace& trace) {
  os << "iter,alpha,delta_not1,delta_full,ops_gbp_equiv,ops_actual,wallclock_ns\n";
  put_row(os, {"0", "0", num(trace.delta0_not1), num(trace.delta0_full), "0", "0", "0"});
  for (const auto& r : trace.rows)
    put_row(os, {std::to_string(r.iter), num(r.alpha), num(r.delta_not1), num(r.delta_full),
                 std::to_string(r.ops_gbp_equiv), std::to_string(r.ops_actual), std::to_string(r.wallclock_ns)});
}

void write_trace_csv(std::ostream& os, const AveragedTrace& trace, bool include_wallclock) {
  const bool with_var = trace.runs > 1;
  os << "iter,alpha,delta_not1,delta_full,ops_gbp_equiv,ops_actual";
  if (include_wallclock) os << ",wallclock_ns";
  if (with_var) os << ",delta_not1_var";
  os << '\n';
  auto row = [&](const std::string& iter, double alpha, double dn, double df, double og, double oa, double w, double v) {
    os << iter << ',' << num(alpha) << ',' << num(dn) << ',' << num(df) << ',' << num(og) << ',' << num(oa);
    if (include_wallclock) os << ',' << num(w);
    if (with_var) os << ',' << num(v);
    os << '\n';
  };
  row("0", 0.0, trace.mean_delta0_not1, trace.mean_delta0_full, 0, 0, 0, 0);
  for (std::size_t i = 0; i < trace.iter.size(); ++i)
    row(std::to_string(trace.iter[i]), trace.alpha[i], trace.mean_delta_not1[i], trace.mean_delta_full[i],
        trace.mean_ops_gbp_equiv[i], trace.mean_ops_actual[i], trace.mean_wallclock_ns[i], trace.var_delta_not1[i]);
}

}  // namespace sgbp::io

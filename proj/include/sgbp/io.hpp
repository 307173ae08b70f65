#pragma once

#include "sgbp/gbp.hpp"
#include "sgbp/model.hpp"
#include "sgbp/oracle.hpp"
#include "sgbp/region_graph.hpp"
#include "sgbp/sgbp.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgbp::io {

/// Thrown for unreadable files and malformed documents.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string model_to_json(const ModelSpec& spec);
ModelSpec model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const ModelSpec& spec);
ModelSpec load_model(const std::filesystem::path& path);

std::string regions_to_json(const RegionGraphSpec& spec);
RegionGraphSpec regions_from_json(const std::string& text);
void save_regions(const std::filesystem::path& path, const RegionGraphSpec& spec);
RegionGraphSpec load_regions(const std::filesystem::path& path);

/// {"alphabet_size", "messages":[{"parent","child","variables","values"}],
///  "beliefs":[{"region","variables","values"}]}; beliefs are optional.
std::string messages_to_json(const Problem& problem, const MessageSet& messages, bool with_beliefs);
/// Reads messages back, matched to edges by (parent id, child id).
MessageSet messages_from_json(const Problem& problem, const std::string& text);
MessageSet load_messages(const Problem& problem, const std::filesystem::path& path);

/// {"partition_function", "marginals":[{"variables","values"}]}
std::string marginals_to_json(const oracle::ExactResult& result);

/// iter,residual_l2
void write_residuals_csv(std::ostream& os, const std::vector<double>& residuals);

/// Single-run trace, starting with an iteration-0 row holding δ^(0).
void write_trace_csv(std::ostream& os, const RunTrace& trace);
/// Averaged trace; a delta_not1_var column is added when more than one run
/// was averaged. With `include_wallclock` false the wall-clock column is
/// omitted so the output is a pure function of the inputs.
void write_trace_csv(std::ostream& os, const AveragedTrace& trace, bool include_wallclock = true);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace sgbp::io

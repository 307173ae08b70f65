#include "sgbp/model.hpp"

#include "sgbp/philox.hpp"

#include <set>
#include <stdexcept>

namespace sgbp {

int Model::factor_index(const std::string& id) const {
  for (std::size_t i = 0; i < factors_.size(); ++i)
    if (factors_[i].id == id) return static_cast<int>(i);
  return -1;
}

Model build_model(ModelSpec spec) {
  if (spec.num_variables < 0) throw std::invalid_argument("num_variables must be nonnegative");
  if (spec.alphabet_size < 2) throw std::invalid_argument("alphabet_size must be at least 2");

  std::set<std::string> ids;
  for (const auto& f : spec.factors) {
    if (!ids.insert(f.id).second) throw std::invalid_argument("duplicate factor id '" + f.id + "'");
    if (f.table.alphabet() != spec.alphabet_size)
      throw std::invalid_argument("factor '" + f.id + "' has alphabet " + std::to_string(f.table.alphabet()));
    for (int v : f.variables())
      if (v < 0 || v >= spec.num_variables)
        throw std::invalid_argument("factor '" + f.id + "' references variable " + std::to_string(v) +
                                    " outside [0, " + std::to_string(spec.num_variables) + ")");
    if (f.table.size() != ipow(spec.alphabet_size, f.variables().size()))
      throw std::invalid_argument("factor '" + f.id + "' has the wrong table length");
    if ((f.table.values().array() < 0.0).any() || !f.table.values().allFinite())
      throw std::invalid_argument("factor '" + f.id + "' has a negative or non-finite entry");
  }

  Model m;
  m.n_ = spec.num_variables;
  m.d_ = spec.alphabet_size;
  m.factors_ = std::move(spec.factors);
  m.adjacency_.assign(static_cast<std::size_t>(m.n_), {});
  for (std::size_t a = 0; a < m.factors_.size(); ++a)
    for (int v : m.factors_[a].variables()) m.adjacency_[static_cast<std::size_t>(v)].push_back(static_cast<int>(a));
  return m;
}

void validate(const PottsParams& p) {
  if (p.grid_rows < 1 || p.grid_cols < 1) throw std::invalid_argument("grid dimensions must be positive");
  if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
  if (!(p.sigma >= 0.0 && p.sigma <= p.mu)) throw std::invalid_argument("need 0 <= sigma <= mu");
  if (!(p.sigma + p.mu < 1.0)) throw std::invalid_argument("need sigma + mu < 1");
}

namespace {
constexpr std::uint32_t kPottsStream = 0x706f7474u;  // "pott"
}

ModelSpec make_potts(const PottsParams& params, int d) {
  validate(params);
  if (d < 2) throw std::invalid_argument("alphabet size must be at least 2");
  const int rows = params.grid_rows;
  const int cols = params.grid_cols;
  ModelSpec spec;
  spec.num_variables = rows * cols;
  spec.alphabet_size = d;

  const Philox4x32 rng(params.seed);
  for (int v = 0; v < spec.num_variables; ++v) {
    FactorTable t({v}, d, 1.0);
    for (int s = 1; s < d; ++s) {
      const double u = rng.uniform({static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(s), kPottsStream, 0});
      t[s] = params.mu + params.sigma * (2.0 * u - 1.0);
    }
    spec.factors.push_back({"phi_" + std::to_string(v), std::move(t)});
  }

  auto pair = [&](int u, int v) {
    FactorTable t({u, v}, d, params.gamma);
    for (int s = 0; s < d; ++s) t[static_cast<Index>(s) * d + s] = 1.0;
    spec.factors.push_back({"psi_" + std::to_string(u) + "_" + std::to_string(v), std::move(t)});
  };
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) pair(v, v + 1);
      if (r + 1 < rows) pair(v, v + cols);
    }
  return spec;
}

}  // namespace sgbp

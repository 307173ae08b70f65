#include "sgbp/gauge.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <map>

namespace sgbp {

namespace {

// Orthonormal basis of the vectors in R^d with zero sum (Helmert contrasts).
Eigen::MatrixXd contrasts(int d) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d, d - 1);
  for (int j = 1; j < d; ++j) {
    const double s = std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) q(i, j - 1) = 1.0 / s;
    q(j, j - 1) = -static_cast<double>(j) / s;
  }
  return q;
}

std::vector<Index> edge_offsets(const RegionGraph& graph, int d) {
  std::vector<Index> off(graph.num_edges() + 1, 0);
  for (std::size_t e = 0; e < graph.num_edges(); ++e)
    off[e + 1] = off[e] + ipow(d, graph.region(graph.edges()[e].child).variables.size());
  return off;
}

Eigen::MatrixXd orthonormal_columns(const Eigen::MatrixXd& a) {
  if (a.cols() == 0) return a;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const Index rank = qr.rank();
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(a.rows(), rank);
  return q;
}

}  // namespace

MessageGauge message_gauge(const RegionGraph& graph, int d) {
  const auto off = edge_offsets(graph, d);
  const Index n = off.back();
  const Eigen::MatrixXd q = contrasts(d);

  std::vector<std::vector<int>> beliefs(graph.num_regions());
  for (std::size_t r = 0; r < graph.num_regions(); ++r) beliefs[r] = belief_edges(graph, static_cast<int>(r));

  // Every nonempty subset of every child scope.
  std::map<Scope, std::vector<int>> subsets;
  for (std::size_t e = 0; e < graph.num_edges(); ++e) {
    const Scope& c = graph.region(graph.edges()[e].child).variables;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << c.size()); ++mask) {
      Scope s;
      for (std::size_t k = 0; k < c.size(); ++k)
        if (mask >> k & 1) s.push_back(c[k]);
      subsets[s].push_back(static_cast<int>(e));
    }
  }

  std::vector<Eigen::VectorXd> columns;
  for (const auto& [s, edges] : subsets) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Index>(graph.num_regions()), static_cast<Index>(edges.size()));
    for (std::size_t r = 0; r < graph.num_regions(); ++r)
      for (std::size_t k = 0; k < edges.size(); ++k)
        if (std::find(beliefs[r].begin(), beliefs[r].end(), edges[k]) != beliefs[r].end())
          m(static_cast<Index>(r), static_cast<Index>(k)) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
    if (lu.rank() == m.cols()) continue;
    const Eigen::MatrixXd kernel = lu.kernel();

    const Index funcs = ipow(d - 1, s.size());
    for (Index w = 0; w < kernel.cols(); ++w)
      for (Index f = 0; f < funcs; ++f) {
        std::vector<int> j(s.size());
        for (Index rem = f, k = static_cast<Index>(s.size()); k-- > 0; rem /= (d - 1))
          j[static_cast<std::size_t>(k)] = static_cast<int>(rem % (d - 1));
        Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
        for (std::size_t k = 0; k < edges.size(); ++k) {
          const double weight = kernel(static_cast<Index>(k), w);
          if (weight == 0.0) continue;
          const auto e = static_cast<std::size_t>(edges[k]);
          const Scope& c = graph.region(graph.edges()[e].child).variables;
          const FactorTable shape(c, d, 0.0);
          for (Index i = 0; i < shape.size(); ++i) {
            const auto x = shape.delinearize(i);
            double v = weight;
            for (std::size_t a = 0; a < s.size(); ++a) {
              const auto pos = static_cast<std::size_t>(std::lower_bound(c.begin(), c.end(), s[a]) - c.begin());
              v *= q(x[pos], j[a]);
            }
            col[off[e] + i] = v;
          }
        }
        columns.push_back(std::move(col));
      }
  }
  Eigen::MatrixXd a(n, static_cast<Index>(columns.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) a.col(static_cast<Index>(k)) = columns[k];
  return {orthonormal_columns(a)};
}

Eigen::VectorXd gauge_coordinates(const MessageGauge& gauge, const MessageSet& m) {
  if (gauge.dimension() == 0) return {};
  return gauge.basis.transpose() * m.flatten().array().log().matrix();
}

MessageSet gauge_transform(const MessageGauge& gauge, const MessageSet& m, const Eigen::VectorXd& c) {
  if (gauge.dimension() == 0) return m;
  const Eigen::VectorXd shift = gauge.basis * c;
  MessageSet out = m;
  Index at = 0;
  for (auto& t : out.tables) {
    t.values().array() *= shift.segment(at, t.size()).array().exp();
    at += t.size();
    normalize_message(t);
  }
  return out;
}

MessageSet gauge_align(const MessageGauge& gauge, const MessageSet& reference, const MessageSet& m) {
  if (gauge.dimension() == 0) return reference;
  return gauge_transform(gauge, reference, gauge_coordinates(gauge, m) - gauge_coordinates(gauge, reference));
}

LinearStability linear_stability(const Problem& problem, const MessageSet& fixed_point, const MessageGauge& gauge) {
  const Eigen::VectorXd x = fixed_point.flatten();
  const Index n = x.size();
  auto unflatten = [&](const Eigen::VectorXd& v) {
    MessageSet m = fixed_point;
    Index at = 0;
    for (auto& t : m.tables) {
      t.values() = v.segment(at, t.size());
      at += t.size();
    }
    return m;
  };
  Eigen::MatrixXd jac(n, n);
  const double h = 1e-7;
  for (Index i = 0; i < n; ++i) {
    Eigen::VectorXd a = x, b = x;
    a[i] += h;
    b[i] -= h;
    jac.col(i) = (gbp_iterate(problem, unflatten(a)).flatten() - gbp_iterate(problem, unflatten(b)).flatten()) / (2 * h);
  }

  // Tangent space of the product of simplices, minus the gauge directions
  // (mapped from log coordinates by diag(m*)).
  Eigen::MatrixXd keep(n, 0);
  {
    Eigen::MatrixXd constraints = Eigen::MatrixXd::Zero(n, static_cast<Index>(fixed_point.size()) + gauge.dimension());
    Index at = 0;
    for (std::size_t e = 0; e < fixed_point.size(); ++e) {
      constraints.block(at, static_cast<Index>(e), fixed_point[e].size(), 1).setOnes();
      at += fixed_point[e].size();
    }
    // Tangent of normalize(m* ⊙ exp(ε g)) at ε = 0: m* ⊙ (g − <m*, g>) per edge.
    if (gauge.dimension() > 0) {
      Eigen::MatrixXd tangent = x.asDiagonal() * gauge.basis;
      at = 0;
      for (std::size_t e = 0; e < fixed_point.size(); ++e) {
        const Index len = fixed_point[e].size();
        const Eigen::RowVectorXd mean = x.segment(at, len).transpose() * gauge.basis.middleRows(at, len);
        tangent.middleRows(at, len) -= x.segment(at, len) * mean;
        at += len;
      }
      constraints.rightCols(gauge.dimension()) = tangent;
    }
    const Eigen::MatrixXd qc = orthonormal_columns(constraints);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd::Identity(n, n) - qc * qc.transpose(), Eigen::ComputeFullU);
    Index rank = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > 0.5) ++rank;
    keep = svd.matrixU().leftCols(rank);
  }

  LinearStability out;
  if (keep.cols() == 0) {
    out.nu = 2.0;
    return out;
  }
  // Reduced map on the complement, taken along the oblique projection that
  // annihilates normalization and gauge directions.
  const Eigen::MatrixXd reduced = keep.transpose() * jac * keep;
  Eigen::EigenSolver<Eigen::MatrixXd> es(reduced, false);
  out.eigenvalues = es.eigenvalues();
  double min_re = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < out.eigenvalues.size(); ++i) {
    out.spectral_radius = std::max(out.spectral_radius, std::abs(out.eigenvalues[i]));
    min_re = std::min(min_re, 1.0 - out.eigenvalues[i].real());
  }
  out.nu = 2.0 * min_re;
  return out;
}

}  // namespace sgbp

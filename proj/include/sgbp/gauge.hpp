#pragma once

#include "sgbp/gbp.hpp"

#include <Eigen/Dense>

namespace sgbp {

/// Log-message directions that leave every region belief unchanged.
///
/// log b_R is linear in the log-messages of belief_edges(R), so a direction g
/// with Σ_{e∈B(R)} g_e constant on every R moves one GBP fixed point to
/// another. Splitting each g_e into orthogonal interaction components over the
/// subsets S of its scope turns the condition into ker(M_S) ⊗ R^{(d−1)^|S|},
/// where M_S is the region × edge incidence matrix restricted to edges whose
/// child scope contains S. Region graphs with redundant marginalization
/// constraints (such as the 2×2 cluster graph of a grid) have a nontrivial
/// gauge, so their fixed point is a manifold rather than a point.
struct MessageGauge {
  /// Orthonormal columns in log-message coordinates, rows in MessageSet::flatten() order.
  Eigen::MatrixXd basis;

  int dimension() const { return static_cast<int>(basis.cols()); }
};

MessageGauge message_gauge(const RegionGraph& graph, int alphabet);

/// Gauge coordinates Bᵀ log m.
Eigen::VectorXd gauge_coordinates(const MessageGauge& gauge, const MessageSet& m);

/// normalize(m ⊙ exp(B c)) edge by edge.
MessageSet gauge_transform(const MessageGauge& gauge, const MessageSet& m, const Eigen::VectorXd& c);

/// The reference moved along the gauge until its gauge coordinates match
/// those of `m`. Equals `reference` when the gauge is trivial.
MessageSet gauge_align(const MessageGauge& gauge, const MessageSet& reference, const MessageSet& m);

struct LinearStability {
  Eigen::VectorXcd eigenvalues;  ///< of the Jacobian of Υ at m*, gauge modes removed
  double spectral_radius = 0.0;
  /// 2 min Re(1 − λ): the local counterpart of ν. For a contraction with
  /// modulus L it is at least 2(1 − L).
  double nu = 0.0;
};

/// Central-difference Jacobian of Υ at a fixed point, restricted to the
/// simplex tangent space with the gauge directions projected out.
LinearStability linear_stability(const Problem& problem, const MessageSet& fixed_point, const MessageGauge& gauge);

}  // namespace sgbp

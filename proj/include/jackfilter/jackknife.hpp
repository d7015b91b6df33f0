#pragma once

#include <optional>
#include <vector>

#include "jackfilter/lsq.hpp"

namespace jackfilter {

/// Sorted 1-based indices into a MeasurementLog.
struct SubsetIndex {
  std::vector<int> indices;
};

struct MemberEstimate {
  SubsetIndex subset;
  ThetaVector theta;
  double mse = 0.0;
  // the estimate at the fit anchor; predictions evolve forward from here,
  // the direction the fit already validated (empty when not fitted)
  ThetaVector theta_fit;
};

/// Subset LSQ estimates sharing one anchor, with the jackknife sizes they
/// were drawn under (d = n - r).
struct EnsembleBatch {
  std::vector<MemberEstimate> members;
  int n = 0;
  int r = 0;
  int d = 0;
  int m = 0;
};

struct JackknifeStats {
  Eigen::VectorXd mean;
  SymMatrix var;
  int n = 0;             // data count
  long m_total = 0;      // cumulative second-stage samples
};

/// m subsets of size r drawn uniformly from {1..n}; every subset contains
/// must_include when given. Unique subsets while m fits in the subset space
/// (rejection-sampled, falling back to with-replacement after 50*m
/// proposals).
std::vector<SubsetIndex> sample_subsets(int n, int r, int m,
                                        std::optional<int> must_include,
                                        RngStream& rng);

/// Second-stage jackknife mean and variance with prefactor r/(d*m).
/// Centers on theta_center when given, else on the batch mean.
JackknifeStats batch_jsve(
    const EnsembleBatch& batch,
    const std::optional<Eigen::VectorXd>& theta_center = std::nullopt);

/// (a1, a2) = (r/n, 1 - r/n).
std::pair<double, double> adaptive_weights(int n, int r);

/// One adaptive assimilation step: mean via (a1, a2) weights, variance via
/// their squares, with the batch variance using prefactor r/((d+1)*m).
/// center_on_updated_mean selects centering on the post-update mean (default)
/// or on the raw batch mean.
JackknifeStats adaptive_update(const JackknifeStats& prev,
                               const EnsembleBatch& new_batch,
                               bool center_on_updated_mean = true);

/// Fits every subset by LSQ anchored at fit_anchor (forward evolution is the
/// numerically safe direction for growth models), then re-anchors each
/// estimate to report_anchor by deterministic evolution. Fits run in
/// parallel; members land in subset order so scheduling never changes the
/// batch. init is the initial guess at fit_anchor.
EnsembleBatch fit_batch(const ModelSpec& model, const MeasurementLog& log,
                        const std::vector<SubsetIndex>& subsets,
                        double fit_anchor, double report_anchor,
                        const Eigen::VectorXd& init,
                        const std::vector<std::array<double, 2>>& bounds,
                        int n_points);

}  // namespace jackfilter

#include "jackfilter/jackknife.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "jackfilter/parallel.hpp"

namespace jackfilter {

namespace {

// binomial coefficient saturated at 2^62
double binomial_saturated(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) {
    c *= static_cast<double>(n - k + i) / i;
    if (c > 4.6e18) return 4.6e18;
  }
  return c;
}

std::vector<int> draw_subset(int n, int r, std::optional<int> must_include,
                             RngStream& rng) {
  std::vector<int> pool;
  pool.reserve(n);
  for (int i = 1; i <= n; ++i) {
    if (!must_include || i != *must_include) pool.push_back(i);
  }
  const int pick = must_include ? r - 1 : r;
  // partial Fisher-Yates
  for (int i = 0; i < pick; ++i) {
    const int j = i + static_cast<int>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<int> out(pool.begin(), pool.begin() + pick);
  if (must_include) out.push_back(*must_include);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<SubsetIndex> sample_subsets(int n, int r, int m,
                                        std::optional<int> must_include,
                                        RngStream& rng) {
  if (r < 1 || r >= n || m < 1) {
    throw InvalidSizes("sample_subsets: need 1 <= r < n and m >= 1");
  }
  if (must_include && (*must_include < 1 || *must_include > n)) {
    throw InvalidSizes("sample_subsets: must_include out of range");
  }
  const double space = must_include ? binomial_saturated(n - 1, r - 1)
                                    : binomial_saturated(n, r);
  bool unique = static_cast<double>(m) <= space;

  std::vector<SubsetIndex> out;
  out.reserve(m);
  std::set<std::vector<int>> seen;
  long proposals = 0;
  const long cap = 50L * m;
  while (static_cast<int>(out.size()) < m) {
    std::vector<int> s = draw_subset(n, r, must_include, rng);
    ++proposals;
    if (unique) {
      if (!seen.insert(s).second) {
        if (proposals >= cap) unique = false;  // fall back with replacement
        continue;
      }
    }
    out.push_back(SubsetIndex{std::move(s)});
  }
  return out;
}

JackknifeStats batch_jsve(const EnsembleBatch& batch,
                          const std::optional<Eigen::VectorXd>& theta_center) {
  if (batch.members.empty()) {
    throw TooFewPoints("batch_jsve: empty batch");
  }
  const Eigen::Index dim = batch.members.front().theta.values.size();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& mem : batch.members) mean += mem.theta.values;
  mean /= static_cast<double>(batch.members.size());

  const Eigen::VectorXd& center = theta_center ? *theta_center : mean;
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& mem : batch.members) {
    const Eigen::VectorXd c = mem.theta.values - center;
    v += c * c.transpose();
  }
  v *= static_cast<double>(batch.r) /
       (static_cast<double>(batch.d) * batch.members.size());

  JackknifeStats stats;
  stats.mean = mean;
  stats.var = psd_project(SymMatrix(v));
  stats.n = batch.n;
  stats.m_total = batch.m;
  return stats;
}

std::pair<double, double> adaptive_weights(int n, int r) {
  if (r < 1 || r > n) {
    throw InvalidSizes("adaptive_weights: need 1 <= r <= n");
  }
  const double a1 = static_cast<double>(r) / n;
  return {a1, 1.0 - a1};
}

JackknifeStats adaptive_update(const JackknifeStats& prev,
                               const EnsembleBatch& new_batch,
                               bool center_on_updated_mean) {
  if (new_batch.n != prev.n + 1) {
    throw BatchMismatch("adaptive_update: batch n must equal prev.n + 1");
  }
  if (new_batch.members.empty()) {
    throw BatchMismatch("adaptive_update: empty batch");
  }
  const auto [a1, a2] = adaptive_weights(new_batch.n, new_batch.r);

  const Eigen::Index dim = prev.mean.size();
  Eigen::VectorXd batch_mean = Eigen::VectorXd::Zero(dim);
  for (const auto& mem : new_batch.members) batch_mean += mem.theta.values;
  batch_mean /= static_cast<double>(new_batch.members.size());

  const Eigen::VectorXd mean = a1 * batch_mean + a2 * prev.mean;

  const Eigen::VectorXd& center = center_on_updated_mean ? mean : batch_mean;
  Eigen::MatrixXd vs = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& mem : new_batch.members) {
    const Eigen::VectorXd c = mem.theta.values - center;
    vs += c * c.transpose();
  }
  vs *= static_cast<double>(new_batch.r) /
        (static_cast<double>(new_batch.d + 1) * new_batch.members.size());

  JackknifeStats out;
  out.mean = mean;
  out.var = psd_project(SymMatrix(a1 * a1 * vs + a2 * a2 * prev.var.mat()));
  out.n = new_batch.n;
  out.m_total = prev.m_total + new_batch.m;
  return out;
}

EnsembleBatch fit_batch(const ModelSpec& model, const MeasurementLog& log,
                        const std::vector<SubsetIndex>& subsets,
                        double fit_anchor, double report_anchor,
                        const Eigen::VectorXd& init,
                        const std::vector<std::array<double, 2>>& bounds,
                        int n_points) {
  EnsembleBatch batch;
  batch.members.resize(subsets.size());
  batch.n = n_points;
  batch.r = subsets.empty() ? 0 : static_cast<int>(subsets[0].indices.size());
  batch.d = batch.n - batch.r;
  batch.m = static_cast<int>(subsets.size());

  parallel_for(subsets.size(), [&](std::size_t i) {
    LsqProblem p;
    p.model = model;
    for (int idx : subsets[i].indices) p.data.push_back(log[idx - 1]);
    p.anchor_time = fit_anchor;
    p.init = ThetaVector{fit_anchor, init};
    p.bounds = bounds;
    LsqSolution sol = fit(p);
    ThetaVector theta = report_anchor == fit_anchor
                            ? sol.theta
                            : evolve_theta(model, sol.theta, report_anchor);
    batch.members[i] =
        MemberEstimate{subsets[i], std::move(theta), sol.mse, sol.theta};
  });
  return batch;
}

}  // namespace jackfilter

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jackfilter/errors.hpp"

namespace jackfilter {

/// Dense symmetric matrix value. Symmetry is enforced on construction by
/// averaging with the transpose; PSD checks use a trace-scaled tolerance
/// so the same settings work for covariances mixing scales 1 and 500.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Eigen::MatrixXd m);

  static SymMatrix Zero(int dim);
  static SymMatrix Identity(int dim);
  static SymMatrix Diagonal(const Eigen::VectorXd& d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  double frobenius() const { return m_.norm(); }

  // eps_psd = 1e-10 * (1 + trace)
  double psd_tolerance() const;
  double min_eigenvalue() const;
  bool is_psd() const;

 private:
  Eigen::MatrixXd m_;
};

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double s, const SymMatrix& a);

/// Principal symmetric square root via eigendecomposition; eigenvalues in
/// [-eps_psd, 0) are clipped to zero. Throws NotPSD below -eps_psd.
SymMatrix matrix_sqrt(const SymMatrix& a);

/// Nearest-PSD projection: symmetrize, clip negative eigenvalues, rebuild.
/// Idempotent.
SymMatrix psd_project(const SymMatrix& a);

/// Arithmetic mean and sample covariance with divisor (count - ddof).
std::pair<Eigen::VectorXd, SymMatrix> sample_moments(
    const std::vector<Eigen::VectorXd>& points, int ddof);

/// Deterministic seeded random stream. Identical (seed, stream_label)
/// yields identical draw sequences on every platform: the generator is
/// std::mt19937_64 (bit-specified by the standard) and the uniform/normal
/// transforms below avoid implementation-defined distributions.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view stream_label);

  std::uint64_t seed() const { return seed_; }
  const std::string& stream_label() const { return label_; }

  // uniform on (0, 1)
  double uniform01();
  // standard normal via Box-Muller; consumes exactly two engine draws
  double gaussian();
  Eigen::VectorXd gaussian_vector(int dim);
  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n);

 private:
  std::uint64_t seed_ = 0;
  std::string label_;
  std::mt19937_64 engine_;
};

}  // namespace jackfilter

#include "jackfilter/numkit.hpp"

#include <cmath>
#include <numbers>

namespace jackfilter {

SymMatrix::SymMatrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) {
    throw InvalidSizes("SymMatrix requires a square matrix");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMatrix SymMatrix::Zero(int dim) {
  return SymMatrix(Eigen::MatrixXd::Zero(dim, dim));
}

SymMatrix SymMatrix::Identity(int dim) {
  return SymMatrix(Eigen::MatrixXd::Identity(dim, dim));
}

SymMatrix SymMatrix::Diagonal(const Eigen::VectorXd& d) {
  return SymMatrix(Eigen::MatrixXd(d.asDiagonal()));
}

double SymMatrix::psd_tolerance() const { return 1e-10 * (1.0 + trace()); }

double SymMatrix::min_eigenvalue() const {
  if (dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m_,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool SymMatrix::is_psd() const { return min_eigenvalue() >= -psd_tolerance(); }

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.mat() + b.mat());
}

SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
  return SymMatrix(a.mat() - b.mat());
}

SymMatrix operator*(double s, const SymMatrix& a) {
  return SymMatrix(s * a.mat());
}

SymMatrix matrix_sqrt(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat());
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.size() > 0 && ev.minCoeff() < -a.psd_tolerance()) {
    throw NotPSD("matrix_sqrt: eigenvalue " + std::to_string(ev.minCoeff()) +
                 " below -eps_psd");
  }
  const Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  return SymMatrix(es.eigenvectors() * root.asDiagonal() *
                   es.eigenvectors().transpose());
}

SymMatrix psd_project(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.mat());
  const Eigen::VectorXd clipped = es.eigenvalues().cwiseMax(0.0);
  return SymMatrix(es.eigenvectors() * clipped.asDiagonal() *
                   es.eigenvectors().transpose());
}

std::pair<Eigen::VectorXd, SymMatrix> sample_moments(
    const std::vector<Eigen::VectorXd>& points, int ddof) {
  const int count = static_cast<int>(points.size());
  if (count < ddof + 1) {
    throw TooFewPoints("sample_moments: need at least ddof+1 points");
  }
  const Eigen::Index dim = points.front().size();
  for (const auto& p : points) {
    if (p.size() != dim) {
      throw TooFewPoints("sample_moments: mixed dimensions");
    }
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& p : points) mean += p;
  mean /= count;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& p : points) {
    const Eigen::VectorXd c = p - mean;
    cov += c * c.transpose();
  }
  cov /= static_cast<double>(count - ddof);
  return {mean, SymMatrix(cov)};
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view stream_label)
    : seed_(seed), label_(stream_label) {
  const std::uint64_t h = fnv1a(stream_label);
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h),
                    static_cast<std::uint32_t>(h >> 32)};
  engine_.seed(seq);
}

double RngStream::uniform01() {
  // 53-bit mantissa, offset by half an ulp so 0 and 1 are excluded
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::gaussian() {
  const double u1 = uniform01();
  const double u2 = uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd RngStream::gaussian_vector(int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gaussian();
  return v;
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw InvalidSizes("RngStream::below(0)");
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace jackfilter

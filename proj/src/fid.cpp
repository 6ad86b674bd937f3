#include "umt/eval/fid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "umt/core/error.hpp"

namespace umt::eval {

using nn::Tensor;

namespace {

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments fit(const Tensor& f) {
  const int n = f.rows(), k = f.cols();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      x(f.data.data(), n, k);
  Moments m;
  m.mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - m.mean.transpose();
  m.cov = centered.transpose() * centered / double(n - 1);
  m.cov.diagonal().array() += 1e-6;
  return m;
}

Eigen::MatrixXd sym_sqrt(const Eigen::MatrixXd& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
  Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

double metric_fid(const Tensor& features_a, const Tensor& features_b) {
  if (features_a.ndim() != 2 || features_b.ndim() != 2 ||
      features_a.cols() != features_b.cols())
    throw ShapeError("metric_fid: feature matrices must be (N,k)/(M,k)");
  if (features_a.rows() < 2 || features_b.rows() < 2)
    throw ShapeError("metric_fid: need at least 2 samples per side");

  const Moments a = fit(features_a), b = fit(features_b);
  const Eigen::MatrixXd ra = sym_sqrt(a.cov);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ra * b.cov * ra);
  const double tr_sqrt = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double d2 = (a.mean - b.mean).squaredNorm();
  const double fid = d2 + a.cov.trace() + b.cov.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, fid);
}

}  // namespace umt::eval

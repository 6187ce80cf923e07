#include <Eigen/Dense>
#include <cmath>

#include "forge/cluster.hpp"

namespace forge {

std::vector<double> project_2d(const PointMatrix& points) {
  if (points.n < 2) throw DataError("project_2d needs at least 2 points");
  Eigen::MatrixXd x(points.n, points.dim);
  for (int i = 0; i < points.n; ++i) {
    for (int j = 0; j < points.dim; ++j) x(i, j) = points.row(i)[j];
  }
  x.rowwise() -= x.colwise().mean();
  if (x.cwiseAbs().maxCoeff() == 0.0) throw DataError("project_2d: all points coincide (rank 0)");

  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
  Eigen::MatrixXd v = svd.matrixV().leftCols(std::min<Eigen::Index>(2, svd.matrixV().cols()));
  if (v.cols() < 2) v.conservativeResize(Eigen::NoChange, 2), v.col(1).setZero();
  for (int c = 0; c < 2; ++c) {
    Eigen::Index arg = 0;
    v.col(c).cwiseAbs().maxCoeff(&arg);
    if (v(arg, c) < 0.0) v.col(c) *= -1.0;
  }
  const Eigen::MatrixXd scores = x * v;
  std::vector<double> out(static_cast<std::size_t>(points.n) * 2);
  for (int i = 0; i < points.n; ++i) {
    out[static_cast<std::size_t>(i) * 2] = scores(i, 0);
    out[static_cast<std::size_t>(i) * 2 + 1] = scores(i, 1);
  }
  return out;
}

}  // namespace forge

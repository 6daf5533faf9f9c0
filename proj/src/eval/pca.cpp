#include "ta3n/eval/pca.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ta3n/error.hpp"

namespace ta3n::eval {

PcaResult pca_project(const std::vector<std::vector<double>>& points) {
  if (points.size() < 2) throw DataError("PCA needs at least two points");
  const auto N = static_cast<Eigen::Index>(points.size());
  const auto D = static_cast<Eigen::Index>(points.front().size());
  if (D == 0) throw ShapeError("PCA needs nonempty vectors");
  Eigen::MatrixXd X(N, D);
  for (Eigen::Index i = 0; i < N; ++i) {
    if (static_cast<Eigen::Index>(points[static_cast<std::size_t>(i)].size()) != D) {
      throw ShapeError("PCA input vectors differ in length");
    }
    for (Eigen::Index j = 0; j < D; ++j) X(i, j) = points[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  X.rowwise() -= X.colwise().mean();

  PcaResult result;
  result.coords.assign(points.size(), {0.0, 0.0});
  const Eigen::MatrixXd cov = (X.transpose() * X) / static_cast<double>(N - 1);
  if (cov.trace() <= 1e-24) {
    result.zero_variance = true;
    return result;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::Index kept = std::min<Eigen::Index>(2, D);
  for (Eigen::Index k = 0; k < kept; ++k) {
    // Eigenvalues come in ascending order.
    Eigen::VectorXd dir = eig.eigenvectors().col(D - 1 - k);
    Eigen::Index arg = 0;
    dir.cwiseAbs().maxCoeff(&arg);
    if (dir(arg) < 0.0) dir = -dir;
    result.variance[static_cast<std::size_t>(k)] = std::max(0.0, eig.eigenvalues()(D - 1 - k));
    const Eigen::VectorXd proj = X * dir;
    for (Eigen::Index i = 0; i < N; ++i) result.coords[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] = proj(i);
  }
  return result;
}

std::string pca_csv(const std::vector<ProjectionRow>& rows) {
  std::ostringstream os;
  os << "id,domain,label,x,y\n";
  char buf[64];
  for (const auto& r : rows) {
    os << r.id << ',' << (r.domain == data::Domain::Source ? "source" : "target") << ','
       << (r.label ? *r.label : -1);
    for (double v : r.xy) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

void write_pca_csv(const std::string& path, const std::vector<ProjectionRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << pca_csv(rows);
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace ta3n::eval

#include "simplex_eval/simplex_geometry.hpp"

#include <cmath>
#include <string>

#include "simplex_eval/errors.hpp"

namespace simplex_eval {

ProbVec::ProbVec(std::vector<double> values, double tol) : v_(std::move(values)) {
  if (v_.empty()) throw InputError("ProbVec: empty component list");
  double sum = 0.0;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const double x = v_[i];
    if (!std::isfinite(x))
      throw InputError("ProbVec: non-finite component at index " + std::to_string(i));
    if (x < -tol || x > 1.0 + tol)
      throw InputError("ProbVec: component " + std::to_string(x) + " at index " +
                       std::to_string(i) + " outside [0,1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > tol)
    throw InputError("ProbVec: components sum to " + std::to_string(sum) + ", expected 1");
}

bool is_in_simplex(const Eigen::VectorXd& v, double tol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || v[i] < -tol) return false;
    sum += v[i];
  }
  return std::abs(sum - 1.0) <= tol;
}

bool is_in_simplex(const std::vector<double>& v, double tol) {
  return is_in_simplex(
      Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())), tol);
}

SimplexRotation build_rotation(int k) {
  if (k < 2) throw InputError("build_rotation: k must be >= 2, got " + std::to_string(k));

  // Edge matrix: column j is e_{j+2} - e_1.
  Eigen::MatrixXd edges = Eigen::MatrixXd::Zero(k, k - 1);
  edges.row(0).setConstant(-1.0);
  edges.block(1, 0, k - 1, k - 1).setIdentity();

  Eigen::HouseholderQR<Eigen::MatrixXd> qr(edges);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();

  // Fix signs: nonnegative R diagonal, and a positive first component in the
  // leftover column (the simplex normal), which R does not constrain.
  for (int j = 0; j < k - 1; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  if (q(0, k - 1) < 0.0) q.col(k - 1) = -q.col(k - 1);

  SimplexRotation rot;
  rot.k = k;
  rot.q = std::move(q);
  rot.anchor = Eigen::VectorXd::Zero(k);
  rot.anchor[0] = 1.0;
  rot.dropped_index = k - 1;
  return rot;
}

Eigen::VectorXd to_reduced(const SimplexRotation& rot, const Eigen::VectorXd& p) {
  if (p.size() != rot.k)
    throw InputError("to_reduced: point has " + std::to_string(p.size()) +
                     " components, rotation expects " + std::to_string(rot.k));
  const Eigen::VectorXd w = rot.q.transpose() * (p - rot.anchor);
  if (std::abs(w[rot.dropped_index]) > 1e-9)
    throw InvariantError("to_reduced: dropped coordinate " +
                         std::to_string(w[rot.dropped_index]) +
                         " is not zero; point is off the simplex hull");
  return w.head(rot.k - 1);
}

Eigen::VectorXd to_reduced(const SimplexRotation& rot, const ProbVec& p) {
  return to_reduced(rot, Eigen::VectorXd(p.as_eigen()));
}

Eigen::VectorXd from_reduced(const SimplexRotation& rot, const Eigen::VectorXd& z) {
  if (z.size() != rot.k - 1)
    throw InputError("from_reduced: reduced point has " + std::to_string(z.size()) +
                     " components, rotation expects " + std::to_string(rot.k - 1));
  Eigen::VectorXd w = Eigen::VectorXd::Zero(rot.k);
  w.head(rot.k - 1) = z;
  return rot.q * w + rot.anchor;
}

}  // namespace simplex_eval

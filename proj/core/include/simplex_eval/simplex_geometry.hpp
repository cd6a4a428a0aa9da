#ifndef SIMPLEX_EVAL_SIMPLEX_GEOMETRY_HPP
#define SIMPLEX_EVAL_SIMPLEX_GEOMETRY_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace simplex_eval {

// A point on the probability simplex: K nonnegative components summing to 1.
class ProbVec {
public:
  ProbVec() = default;

  // Validates on construction: components in [0,1] and sum within tol of 1.
  // Throws InputError otherwise.
  explicit ProbVec(std::vector<double> values, double tol = 1e-9);

  std::size_t size() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& data() const { return v_; }

  Eigen::Map<const Eigen::VectorXd> as_eigen() const {
    return Eigen::Map<const Eigen::VectorXd>(v_.data(), static_cast<Eigen::Index>(v_.size()));
  }

private:
  std::vector<double> v_;
};

// Component floor -tol and |sum - 1| <= tol.
bool is_in_simplex(const Eigen::VectorXd& v, double tol = 1e-9);
bool is_in_simplex(const std::vector<double>& v, double tol = 1e-9);

// Isometric change of coordinates between the K-simplex embedded in R^K and
// R^(K-1).  The rotation is the full Q factor of the QR decomposition of the
// K x (K-1) matrix whose columns are the simplex edges out of vertex e_1
// (first row all -1, identity below).  Signs are fixed so diag(R) >= 0 and
// the last Q column has positive first component, which makes the factor
// reproducible across platforms and Eigen versions.
//
// For any simplex point p the last coordinate of q^T p equals 1/sqrt(K); the
// transform anchors e_1 at the origin and drops that coordinate.
struct SimplexRotation {
  int k = 0;
  Eigen::MatrixXd q;             // K x K orthogonal
  Eigen::VectorXd anchor;        // e_1
  int dropped_index = 0;         // always k - 1
};

// k >= 2.
SimplexRotation build_rotation(int k);

// Reduced coordinates of p: first K-1 entries of q^T (p - e_1).  The dropped
// coordinate is checked to be 0 within 1e-9.
Eigen::VectorXd to_reduced(const SimplexRotation& rot, const Eigen::VectorXd& p);
Eigen::VectorXd to_reduced(const SimplexRotation& rot, const ProbVec& p);

// Inverse map.  The result always sums to 1 (it lies on the affine hull of
// the simplex) but may have negative components; callers that need a point
// inside the simplex must check is_in_simplex themselves.
Eigen::VectorXd from_reduced(const SimplexRotation& rot, const Eigen::VectorXd& z);

}  // namespace simplex_eval

#endif

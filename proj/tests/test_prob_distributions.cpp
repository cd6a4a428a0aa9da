#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/prob_distributions.hpp"
#include "simplex_eval/rng.hpp"
#include "simplex_eval/simplex_geometry.hpp"

using namespace simplex_eval;

TEST_CASE("dirichlet_sample symmetric mean") {
  RngStream rng(101);
  const std::vector<double> alpha{1.0, 1.0, 1.0};
  double mean[3] = {0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto p = dirichlet_sample(alpha, rng);
    for (int c = 0; c < 3; ++c) mean[c] += p[c];
  }
  for (int c = 0; c < 3; ++c) CHECK(mean[c] / n == doctest::Approx(1.0 / 3).epsilon(0.03));
}

TEST_CASE("dirichlet_sample concentrated variance") {
  // Dirichlet(10,10,10): per-component variance (1/3)(2/3)/31 = 2/279.
  RngStream rng(102);
  const std::vector<double> alpha{10.0, 10.0, 10.0};
  const int n = 100000;
  double sum[3] = {0, 0, 0}, sq[3] = {0, 0, 0};
  for (int i = 0; i < n; ++i) {
    const auto p = dirichlet_sample(alpha, rng);
    for (int c = 0; c < 3; ++c) {
      sum[c] += p[c];
      sq[c] += p[c] * p[c];
    }
  }
  for (int c = 0; c < 3; ++c) {
    const double m = sum[c] / n;
    const double v = sq[c] / n - m * m;
    CHECK(v == doctest::Approx(2.0 / 279.0).epsilon(0.10));
  }
}

TEST_CASE("dirichlet_sample sparse regime") {
  // Dirichlet(0.2,0.2,0.2): P(max > 0.9) = 3 P(Beta(0.2,0.4) > 0.9) = 0.4472.
  RngStream rng(103);
  const std::vector<double> alpha{0.2, 0.2, 0.2};
  const int n = 100000;
  int over = 0;
  for (int i = 0; i < n; ++i) {
    const auto p = dirichlet_sample(alpha, rng);
    CHECK(is_in_simplex(p, 1e-12));
    double mx = 0.0;
    for (double x : p) mx = std::max(mx, x);
    if (mx > 0.9) ++over;
  }
  CHECK(static_cast<double>(over) / n == doctest::Approx(0.4472).epsilon(0.03));
}

TEST_CASE("dirichlet_sample rejects bad concentrations") {
  RngStream rng(104);
  CHECK_THROWS_AS(dirichlet_sample({1.0, 0.0}, rng), InputError);
  CHECK_THROWS_AS(dirichlet_sample({1.0, -2.0}, rng), InputError);
  CHECK_THROWS_AS(dirichlet_sample({}, rng), InputError);
}

TEST_CASE("dirichlet_log_pdf closed forms") {
  // Uniform on the 2-simplex has constant density Gamma(3) = 2.
  CHECK(dirichlet_log_pdf({1, 1, 1}, {0.2, 0.3, 0.5}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(dirichlet_log_pdf({1, 1, 1}, {0.6, 0.3, 0.1}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // Dirichlet(2,1,1) at (0.5,0.25,0.25): Gamma(4)/Gamma(2) * p1 = 6 * 0.5.
  CHECK(dirichlet_log_pdf({2, 1, 1}, {0.5, 0.25, 0.25}) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("dirichlet_log_pdf boundary policy") {
  // alpha_k > 1: density is 0 at the boundary regardless of policy.
  CHECK(dirichlet_log_pdf({2, 1, 1}, {0.0, 0.5, 0.5}) ==
        -std::numeric_limits<double>::infinity());
  // alpha_k < 1: diverges; the policy picks error vs -inf.
  CHECK_THROWS_AS(dirichlet_log_pdf({0.5, 1, 1}, {0.0, 0.5, 0.5}), InputError);
  CHECK(dirichlet_log_pdf({0.5, 1, 1}, {0.0, 0.5, 0.5}, BoundaryPolicy::neg_inf) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("dirichlet pdf integrates to one") {
  // Importance sampling against the uniform simplex density Gamma(3) = 2.
  RngStream rng(105);
  const std::vector<double> target{3.0, 2.0, 4.0};
  const std::vector<double> unif{1.0, 1.0, 1.0};
  const int n = 200000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto p = dirichlet_sample(unif, rng);
    acc += std::exp(dirichlet_log_pdf(target, p)) / 2.0;
  }
  CHECK(acc / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("precision recovery at fixed mean") {
  RngStream rng(106);
  const std::vector<double> alpha{2.0, 3.0, 5.0};  // mean (0.2,0.3,0.5), precision 10
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 5000; ++i) data.push_back(dirichlet_sample(alpha, rng));
  const DirichletFitResult fit = fit_dirichlet_mean_precision(data);
  CHECK_FALSE(fit.precision_capped);
  CHECK(fit.precision == doctest::Approx(10.0).epsilon(0.15));
  CHECK(fit.mean[0] == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("precision recovery on the uniform simplex") {
  RngStream rng(107);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 5000; ++i) data.push_back(dirichlet_sample({1.0, 1.0, 1.0}, rng));
  const DirichletFitResult fit = fit_dirichlet_mean_precision(data);
  CHECK(fit.precision == doctest::Approx(3.0).epsilon(0.15));
}

TEST_CASE("degenerate data caps the precision") {
  const std::vector<std::vector<double>> data{{0.25, 0.75}, {0.25, 0.75}};
  const DirichletFitResult fit = fit_dirichlet_mean_precision(data);
  CHECK(fit.precision_capped);
  CHECK(fit.precision == doctest::Approx(1e6));
}

TEST_CASE("fit keeps the mean pinned to the clipped sample mean") {
  RngStream rng(108);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 500; ++i) data.push_back(dirichlet_sample({4.0, 1.0, 1.0}, rng));

  double want[3] = {0, 0, 0};
  for (const auto& row : data)
    for (int c = 0; c < 3; ++c) want[c] += row[c];
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    want[c] = std::clamp(want[c] / data.size(), 1e-6, 1.0 - 1e-6);
    total += want[c];
  }
  const DirichletFitResult fit = fit_dirichlet_mean_precision(data);
  for (int c = 0; c < 3; ++c) CHECK(fit.mean[c] == doctest::Approx(want[c] / total).epsilon(1e-12));
}

TEST_CASE("fit trajectory is monotone") {
  RngStream rng(109);
  std::vector<std::vector<double>> data;
  for (int i = 0; i < 300; ++i) data.push_back(dirichlet_sample({6.0, 2.0, 2.0}, rng));
  DirichletFitOptions opts;
  opts.record_trace = true;
  const DirichletFitResult fit = fit_dirichlet_mean_precision(data, opts);
  REQUIRE(fit.ll_trace.size() >= 2);
  for (std::size_t i = 1; i < fit.ll_trace.size(); ++i)
    CHECK(fit.ll_trace[i] >= fit.ll_trace[i - 1] - 1e-8);
}

TEST_CASE("fit needs at least two points") {
  CHECK_THROWS_AS(fit_dirichlet_mean_precision({{0.5, 0.5}}), InputError);
  CHECK_THROWS_AS(fit_dirichlet_mean_precision({}), InputError);
}

TEST_CASE("mvn_sample moments") {
  RngStream rng(110);
  const Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  const int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mvn_sample(mu, cov, rng);
    mean += x;
    second += x * x.transpose();
  }
  mean /= n;
  const Eigen::MatrixXd c = second / n - mean * mean.transpose();
  CHECK(c(0, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(c(1, 1) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(c(0, 1)) < 0.05);
}

TEST_CASE("mvn_sample zero covariance returns the mean exactly") {
  RngStream rng(111);
  Eigen::VectorXd mu(2);
  mu << 0.3, -1.7;
  const Eigen::VectorXd x = mvn_sample(mu, Eigen::MatrixXd::Zero(2, 2), rng);
  CHECK(x == mu);
}

TEST_CASE("mvn_sample diagonal scales") {
  RngStream rng(112);
  Eigen::VectorXd mu(2);
  mu << 1.0, 2.0;
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
  cov(0, 0) = 0.01;
  cov(1, 1) = 0.04;
  const int n = 100000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd x = mvn_sample(mu, cov, rng);
    mean += x;
    sq += x.cwiseProduct(x);
  }
  mean /= n;
  CHECK(std::sqrt(sq[0] / n - mean[0] * mean[0]) == doctest::Approx(0.1).epsilon(0.05));
  CHECK(std::sqrt(sq[1] / n - mean[1] * mean[1]) == doctest::Approx(0.2).epsilon(0.05));
  CHECK(mean[0] == doctest::Approx(1.0).epsilon(0.01));
  CHECK(mean[1] == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("mvn_sample rejects an indefinite covariance") {
  RngStream rng(113);
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 2.0, 2.0, 1.0;  // eigenvalues 3 and -1
  CHECK_THROWS_AS(mvn_sample(Eigen::VectorXd::Zero(2), cov, rng), InputError);
}

TEST_CASE("estimate_mean_cov hand example") {
  std::vector<Eigen::VectorXd> pts(2, Eigen::VectorXd(2));
  pts[0] << 0.0, 0.0;
  pts[1] << 2.0, 2.0;
  const MeanCov mc = estimate_mean_cov(pts);
  CHECK(mc.mean[0] == 1.0);
  CHECK(mc.mean[1] == 1.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) CHECK(mc.cov(i, j) == 2.0);
}

TEST_CASE("estimate_mean_cov degenerate and error cases") {
  std::vector<Eigen::VectorXd> pts(10, Eigen::VectorXd(2));
  for (auto& p : pts) p << 0.25, -0.75;  // dyadic, so the mean is exact
  const MeanCov mc = estimate_mean_cov(pts);
  CHECK(mc.cov.norm() == 0.0);

  CHECK_THROWS_AS(estimate_mean_cov({Eigen::VectorXd::Zero(2)}), InputError);
  CHECK_THROWS_AS(estimate_mean_cov({}), InputError);
}

TEST_CASE("estimate_mean_cov on standard normal draws") {
  RngStream rng(114);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(100000);
  for (int i = 0; i < 100000; ++i) {
    Eigen::VectorXd x(2);
    x << rng.normal(), rng.normal();
    pts.push_back(std::move(x));
  }
  const MeanCov mc = estimate_mean_cov(pts);
  CHECK(std::abs(mc.mean[0]) < 0.02);
  CHECK(std::abs(mc.mean[1]) < 0.02);
  CHECK(mc.cov(0, 0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(mc.cov(1, 1) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(mc.cov(0, 1)) < 0.05);
  // Symmetric PSD within jitter tolerance.
  CHECK((mc.cov - mc.cov.transpose()).norm() < 1e-14);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mc.cov);
  CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

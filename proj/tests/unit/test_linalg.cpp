#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "cpo/error.hpp"
#include "cpo/linalg.hpp"

using cpo::la::cdouble;
using cpo::la::Matrix;

TEST_CASE("lu solve agrees with Eigen") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (std::size_t n : {1u, 2u, 5u, 27u, 40u}) {
    Matrix a(n);
    Eigen::MatrixXcd ea(n, n);
    std::vector<cdouble> b(n);
    Eigen::VectorXcd eb(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const cdouble v{g(rng), g(rng)};
        a(r, c) = v;
        ea(r, c) = v;
      }
      b[r] = {g(rng), g(rng)};
      eb(r) = b[r];
    }
    const Eigen::VectorXcd ex = ea.fullPivLu().solve(eb);
    cpo::la::SolveReport report;
    const auto x = cpo::la::lu_solve(a, b, &report);
    double err = 0.0;
    for (std::size_t k = 0; k < n; ++k) err = std::max(err, std::abs(x[k] - ex(k)));
    CHECK(err < 1e-10 * (1.0 + ex.cwiseAbs().maxCoeff()));
    CHECK(report.pivot_ratio >= 1.0);

    const auto back = a.multiply(x);
    for (std::size_t k = 0; k < n; ++k) CHECK(std::abs(back[k] - b[k]) < 1e-10);
  }
}

TEST_CASE("pivoting handles a zero leading entry") {
  Matrix a(2);
  a(0, 0) = 0.0;
  a(0, 1) = 1.0;
  a(1, 0) = 1.0;
  a(1, 1) = 0.0;
  const auto x = cpo::la::lu_solve(a, {2.0, 3.0});
  CHECK(std::abs(x[0] - 3.0) < 1e-15);
  CHECK(std::abs(x[1] - 2.0) < 1e-15);
}

TEST_CASE("singular system is reported") {
  Matrix a(3);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) a(r, c) = static_cast<double>(r + 1);
  try {
    cpo::la::lu_solve(a, {1.0, 2.0, 3.0});
    FAIL("no throw");
  } catch (const cpo::NumericError& e) {
    CHECK(e.code() == "singular_system");
  }
}

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "grasswalk/errors.hpp"
#include "grasswalk/objectives.hpp"

using namespace grasswalk;

TEST_CASE("quadratic, rastrigin and ackley vanish at their centers") {
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 0.5);
  CHECK(QuadraticLoss(c).eval(c) == 0.0);
  CHECK(QuadraticLoss(c).eval(Eigen::VectorXd::Zero(4)) == doctest::Approx(1.0));
  CHECK(std::abs(RastriginLoss(c).eval(c)) < 1e-12);
  CHECK(AckleyLoss(c).eval(c) >= 0.0);
  CHECK(AckleyLoss(c).eval(c) < 1e-12);
  // Rastrigin at integer offsets: each coordinate contributes its square
  Eigen::VectorXd x = c;
  x[0] += 1.0;
  CHECK(RastriginLoss(c).eval(x) == doctest::Approx(1.0));
  CHECK(AckleyLoss(c).eval(x) > 1.0);
}

TEST_CASE("stereo maps onto the sphere") {
  Eigen::VectorXd y(2);
  y << 0.0, 0.0;
  Eigen::VectorXd p = stereo(y);
  CHECK(p[0] == 0.0);
  CHECK(p[1] == 0.0);
  CHECK(p[2] == -1.0);
  y << 1.0, 0.0;
  p = stereo(y);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(0.0));
  y << 3e200, -4e200;
  p = stereo(y);
  CHECK(std::isfinite(p.norm()));
  CHECK(p.norm() == doctest::Approx(1.0));
  CHECK(p[2] == doctest::Approx(1.0));
  y << 0.3, -2.1;
  CHECK(stereo(y).norm() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("thomson energies of known configurations") {
  ThomsonProblem two(2, 2);
  Eigen::VectorXd y(4);
  y << 0.0, 0.0, 1e300, 0.0;  // south pole and (nearly) north pole
  CHECK(two.eval(y) == doctest::Approx(0.5).epsilon(1e-12));
  y << 0.5, 0.2, 0.0, 0.0;
  // the image of y2 = 0 is the south pole; antipode of stereo(y1) has chart -y1/|y1|^2
  const Eigen::Vector2d y1(0.5, 0.2);
  const Eigen::Vector2d y2 = -y1 / y1.squaredNorm();
  y << y1, y2;
  CHECK(two.eval(y) == doctest::Approx(0.5).epsilon(1e-12));

  // equilateral triangle on the equator: charts are unit vectors at 120 degrees
  ThomsonProblem three(3, 2);
  Eigen::VectorXd t(6);
  for (int i = 0; i < 3; ++i) {
    t[2 * i] = std::cos(2 * M_PI * i / 3);
    t[2 * i + 1] = std::sin(2 * M_PI * i / 3);
  }
  CHECK(three.eval(t) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
  const Eigen::MatrixXd pts = three.points(t);
  CHECK((pts.row(0) - pts.row(1)).norm() == doctest::Approx(std::sqrt(3.0)));

  // regular tetrahedron from sphere points mapped back into charts
  ThomsonProblem four(4, 2);
  Eigen::MatrixXd tet(4, 3);
  tet << 1, 1, 1, 1, -1, -1, -1, 1, -1, -1, -1, 1;
  tet /= std::sqrt(3.0);
  Eigen::VectorXd q(8);
  for (int i = 0; i < 4; ++i) {
    const double den = 1.0 - tet(i, 2);
    q[2 * i] = tet(i, 0) / den;
    q[2 * i + 1] = tet(i, 1) / den;
  }
  CHECK(four.eval(q) == doctest::Approx(6.0 / std::sqrt(8.0 / 3.0)).epsilon(1e-12));
  CHECK(four.eval(q) == doctest::Approx(3.6742346142).epsilon(1e-9));
}

TEST_CASE("coincident thomson points hit the cap") {
  ThomsonProblem two(2, 2);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(4);
  CHECK(two.eval(y) == kSingularCap);
  CHECK_THROWS_AS(ThomsonProblem(1, 2), ArgumentError);
}

TEST_CASE("thomson optimum table matches the oracle file") {
  std::ifstream in(std::string(GRASSWALK_DATA_DIR) + "/thomson_s2_optima.csv");
  REQUIRE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("N,", 0) == 0) continue;
    std::stringstream ss(line);
    std::string f;
    std::getline(ss, f, ',');
    const int N = std::stoi(f);
    std::getline(ss, f, ',');
    std::getline(ss, f, ',');
    const double e = std::stod(f);
    REQUIRE(thomson_s2_optimum(N).has_value());
    CHECK(*thomson_s2_optimum(N) == doctest::Approx(e).epsilon(1e-12));
    CHECK(*ThomsonProblem(N, 2).known_optimum() == doctest::Approx(e).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 11);
  CHECK(*thomson_s2_optimum(2) == 0.5);
  CHECK(*thomson_s2_optimum(3) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-10));
  CHECK_FALSE(thomson_s2_optimum(13).has_value());
  CHECK_FALSE(ThomsonProblem(5, 3).known_optimum().has_value());
}

TEST_CASE("clip and spike") {
  auto q = std::make_shared<const QuadraticLoss>(Eigen::VectorXd::Zero(2));
  auto c = clip(q, 1.0);
  CHECK(c->eval(Eigen::Vector2d(0.1, 0.0)) == 1.0);
  CHECK(c->eval(Eigen::Vector2d(2.0, 0.0)) == 4.0);

  const Eigen::Vector2d center(3.0, 0.0);
  SpikedLoss s(q, center, 0.5, 100.0);
  CHECK(s.floor() == doctest::Approx(9.0 - 100.0));
  CHECK(s.eval(center) == doctest::Approx(-91.0));
  CHECK(s.eval(Eigen::Vector2d(1.0, 1.0)) == q->eval(Eigen::Vector2d(1.0, 1.0)));
  CHECK(s.eval(Eigen::Vector2d(3.25, 0.0)) == doctest::Approx(3.25 * 3.25 - 25.0));
  CHECK_THROWS_AS(SpikedLoss(q, center, 0.0, 1.0), ArgumentError);
}

TEST_CASE("restricted loss counts evaluations") {
  auto q = std::make_shared<const QuadraticLoss>(Eigen::Vector3d(1, 2, 3));
  RestrictedLoss r(q, Subspace(Eigen::MatrixXd::Identity(3, 2)));
  CHECK(r.eval_restricted(Eigen::Vector2d(1, 2)) == doctest::Approx(9.0));
  CHECK(r.eval_restricted(Eigen::Vector2d(0, 0)) == doctest::Approx(14.0));
  CHECK(r.stats().evals == 2);
  CHECK(r.stats().min_value == doctest::Approx(9.0));
}

#include <doctest.h>

#include <cmath>

#include "grasswalk/rng.hpp"

using grasswalk::RngStream;

TEST_CASE("same seed and path replay the same sequence") {
  RngStream a(7, {1, 2, 3});
  RngStream b(7, {1, 2, 3});
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("child streams differ and do not consume the parent") {
  RngStream root(11);
  RngStream c0 = root.child(0);
  RngStream c1 = root.child(1);
  CHECK(c0.key() != c1.key());
  CHECK(c0.next_u64() != c1.next_u64());

  RngStream fresh(11);
  RngStream r2 = root;
  CHECK(r2.next_u64() == fresh.next_u64());

  CHECK(root.child({3, 4}).key() == root.child(3).child(4).key());
  CHECK(RngStream(1).child(0).key() != RngStream(2).child(0).key());
}

TEST_CASE("unit vectors are on the sphere and normals look standard") {
  RngStream rng(5);
  for (int i = 0; i < 20; ++i) CHECK(rng.unit_vector(7).norm() == doctest::Approx(1.0).epsilon(1e-14));
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(s2 / n - 1.0) < 0.02);
}

// Copyright 2026 The sqp Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>

#include "sqp/tensor.hpp"

using namespace sqp;

TEST_SUITE("tensor") {
  TEST_CASE("symmetrize averages a rank-2 tensor over both orderings") {
    Tensor<double> t(2, 2);
    t(0, 1) = 1.0;
    const auto s = symmetrize(t);
    CHECK(s(0, 0) == 0.0);
    CHECK(s(0, 1) == doctest::Approx(0.5));
    CHECK(s(1, 0) == doctest::Approx(0.5));
    CHECK(s(1, 1) == 0.0);
  }

  TEST_CASE("symmetrize is idempotent") {
    Tensor<double> t(3, 3);
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = 0.1 * static_cast<double>(i * i % 7) - 0.3;
    const auto s = symmetrize(t);
    const auto s2 = symmetrize(s);
    CHECK((s.data() - s2.data()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("a single rank-3 entry spreads over its permutation orbit") {
    Tensor<double> t(2, 3);
    t(0, 1, 0) = 6.0;
    const auto s = symmetrize(t);
    // six permutations land on three distinct entries, two each
    CHECK(s(0, 0, 1) == doctest::Approx(2.0));
    CHECK(s(0, 1, 0) == doctest::Approx(2.0));
    CHECK(s(1, 0, 0) == doctest::Approx(2.0));
    CHECK(s.data().sum() == doctest::Approx(6.0));
    CHECK(s(0, 0, 0) == 0.0);
    CHECK(s(1, 1, 0) == 0.0);
  }

  TEST_CASE("a rank-3 entry with distinct indices gives six unit entries") {
    Tensor<double> t(3, 3);
    t(0, 1, 2) = 6.0;
    const auto s = symmetrize(t);
    std::vector<int> idx{0, 1, 2};
    int count = 0;
    do {
      CHECK(s.at(idx) == doctest::Approx(1.0));
      ++count;
    } while (std::next_permutation(idx.begin(), idx.end()));
    CHECK(count == 6);
    CHECK(s.data().sum() == doctest::Approx(6.0));
  }

  TEST_CASE("packing round-trips a symmetric tensor") {
    Tensor<double> t(4, 3);
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = std::sin(1.0 + static_cast<double>(i));
    const auto s = symmetrize(t);
    const auto packed = pack_symmetric(s);
    CHECK(packed.size() == 20);
    const auto back = unpack_symmetric(packed, 4, 3);
    CHECK((back.data() - s.data()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("contract matches explicit index sums") {
    Tensor<double> a(3, 3), b(3, 2);
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = 0.5 * static_cast<double>(i % 5) - 1.0;
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = 0.25 * static_cast<double>(i) + 0.1;

    const auto c1 = contract(a, b, 1);
    REQUIRE(c1.rank() == 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) {
          double ref = 0.0;
          for (int q = 0; q < 3; ++q) ref += a(i, j, q) * b(q, k);
          CHECK(c1(i, j, k) == doctest::Approx(ref));
        }

    const auto c2 = contract(a, b, 2);
    REQUIRE(c2.rank() == 1);
    for (int i = 0; i < 3; ++i) {
      double ref = 0.0;
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) ref += a(i, p, q) * b(p, q);
      CHECK(c2(i) == doctest::Approx(ref));
    }

    const auto full = contract_trailing(a, b);
    REQUIRE(full.rank() == 1);
    for (int i = 0; i < 3; ++i) CHECK(full(i) == doctest::Approx(c2(i)));
  }

  TEST_CASE("outer product and symplectic matrix") {
    Tensor<double> a(2, 1), b(2, 1);
    a(0) = 2.0;
    a(1) = 3.0;
    b(0) = 5.0;
    b(1) = 7.0;
    const auto o = outer(a, b);
    CHECK(o(1, 0) == doctest::Approx(15.0));
    CHECK(o(0, 1) == doctest::Approx(14.0));

    const Eigen::MatrixXd J = symplectic_j(2);
    CHECK((J * J + Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-15);
    CHECK(J(0, 2) == -1.0);
    CHECK(J(2, 0) == 1.0);

    const auto ja = apply_j_first(a);
    CHECK(ja(0) == doctest::Approx(-3.0));
    CHECK(ja(1) == doctest::Approx(2.0));
  }
}

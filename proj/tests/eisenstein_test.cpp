/*
 * Copyright 2026 The ejlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <random>

#include "ejlab/eisenstein.hpp"
#include "ejlab/error.hpp"

using ejlab::EisensteinInt;

TEST(Eisenstein, RhoSquaredIsRhoMinusOne) {
  EXPECT_EQ(ejlab::eisenstein_multiply({0, 1}, {0, 1}), (EisensteinInt{-1, 1}));
}

TEST(Eisenstein, OneIsIdentity) {
  EXPECT_EQ(ejlab::eisenstein_multiply({1, 0}, {3, 4}), (EisensteinInt{3, 4}));
}

TEST(Eisenstein, ProductWithConjugateIsNorm) {
  EXPECT_EQ(ejlab::conjugate({3, 4}), (EisensteinInt{7, -4}));
  EXPECT_EQ(ejlab::eisenstein_multiply({3, 4}, {7, -4}), (EisensteinInt{37, 0}));
}

TEST(Eisenstein, Norms) {
  EXPECT_EQ(ejlab::eisenstein_norm({3, 4}), 37);
  EXPECT_EQ(ejlab::eisenstein_norm({5, 6}), 91);
  EXPECT_EQ(ejlab::eisenstein_norm({2, 3}), 19);
  EXPECT_EQ(ejlab::eisenstein_norm({0, 0}), 0);
}

TEST(Eisenstein, NormIsMultiplicative) {
  std::mt19937_64 gen(42);
  std::uniform_int_distribution<std::int64_t> coord(-1000, 1000);
  for (int i = 0; i < 2000; ++i) {
    const EisensteinInt x{coord(gen), coord(gen)}, y{coord(gen), coord(gen)};
    EXPECT_EQ(ejlab::eisenstein_norm(x * y), ejlab::eisenstein_norm(x) * ejlab::eisenstein_norm(y));
    EXPECT_GE(ejlab::eisenstein_norm(x), 0);
  }
}

TEST(Eisenstein, UnitDirectionsHaveNormOneAndCancelPairwise) {
  for (int k = 0; k < ejlab::kDirections; ++k) {
    const auto u = ejlab::kUnitDirections[static_cast<std::size_t>(k)];
    EXPECT_EQ(ejlab::eisenstein_norm(u), 1);
    EXPECT_EQ(u + ejlab::kUnitDirections[static_cast<std::size_t>(ejlab::opposite_direction(k))], (EisensteinInt{0, 0}));
    // successive directions differ by a factor rho
    EXPECT_EQ(ejlab::kUnitDirections[static_cast<std::size_t>((k + 1) % 6)], (u * EisensteinInt{0, 1}));
  }
}

TEST(Eisenstein, OverflowIsReported) {
  const std::int64_t big = std::int64_t{1} << 40;
  EXPECT_THROW(ejlab::eisenstein_multiply({big, big}, {big, big}), ejlab::OverflowError);
  EXPECT_THROW(ejlab::eisenstein_norm({big, big}), ejlab::OverflowError);
  EXPECT_THROW((EisensteinInt{INT64_MAX, 0} + EisensteinInt{1, 0}), ejlab::OverflowError);
}

TEST(Eisenstein, PlaneEmbedding) {
  const auto p = ejlab::to_plane({0, 1});
  EXPECT_DOUBLE_EQ(p.x, 0.5);
  EXPECT_NEAR(p.y, std::sqrt(3.0) / 2, 1e-15);
}

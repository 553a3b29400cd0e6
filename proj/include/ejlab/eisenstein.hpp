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

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <ostream>

#include "ejlab/error.hpp"

namespace ejlab {

/// A point a + b*rho of the Eisenstein lattice, rho = e^{i*pi/3}, rho^2 = rho - 1.
struct EisensteinInt {
  std::int64_t a = 0;
  std::int64_t b = 0;

  friend constexpr bool operator==(const EisensteinInt&, const EisensteinInt&) = default;
  friend constexpr auto operator<=>(const EisensteinInt&, const EisensteinInt&) = default;
};

namespace detail {

inline std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r = 0;
  if (__builtin_add_overflow(x, y, &r)) throw OverflowError("Eisenstein arithmetic overflow (add)");
  return r;
}

inline std::int64_t checked_sub(std::int64_t x, std::int64_t y) {
  std::int64_t r = 0;
  if (__builtin_sub_overflow(x, y, &r)) throw OverflowError("Eisenstein arithmetic overflow (sub)");
  return r;
}

inline std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r = 0;
  if (__builtin_mul_overflow(x, y, &r)) throw OverflowError("Eisenstein arithmetic overflow (mul)");
  return r;
}

}  // namespace detail

inline EisensteinInt operator+(const EisensteinInt& x, const EisensteinInt& y) {
  return {detail::checked_add(x.a, y.a), detail::checked_add(x.b, y.b)};
}

inline EisensteinInt operator-(const EisensteinInt& x, const EisensteinInt& y) {
  return {detail::checked_sub(x.a, y.a), detail::checked_sub(x.b, y.b)};
}

inline EisensteinInt operator-(const EisensteinInt& x) { return EisensteinInt{} - x; }

/// (a + b rho)(c + d rho) = (ac - bd) + (ad + bc + bd) rho. Throws OverflowError.
inline EisensteinInt eisenstein_multiply(const EisensteinInt& x, const EisensteinInt& y) {
  using detail::checked_add;
  using detail::checked_mul;
  using detail::checked_sub;
  const auto ac = checked_mul(x.a, y.a);
  const auto bd = checked_mul(x.b, y.b);
  const auto ad = checked_mul(x.a, y.b);
  const auto bc = checked_mul(x.b, y.a);
  return {checked_sub(ac, bd), checked_add(checked_add(ad, bc), bd)};
}

inline EisensteinInt operator*(const EisensteinInt& x, const EisensteinInt& y) {
  return eisenstein_multiply(x, y);
}

/// N(a + b rho) = a^2 + ab + b^2. Throws OverflowError.
inline std::int64_t eisenstein_norm(const EisensteinInt& x) {
  using detail::checked_add;
  using detail::checked_mul;
  return checked_add(checked_add(checked_mul(x.a, x.a), checked_mul(x.a, x.b)), checked_mul(x.b, x.b));
}

/// Complex conjugate: conj(a + b rho) = (a + b) - b rho.
inline EisensteinInt conjugate(const EisensteinInt& x) {
  return {detail::checked_add(x.a, x.b), detail::checked_sub(0, x.b)};
}

/// Number of unit directions in the lattice.
inline constexpr int kDirections = 6;

/// Unit directions indexed 0..5: +1, +rho, +rho^2, -1, -rho, -rho^2.
/// Consecutive indices are 60 degrees apart; k and (k + 3) % 6 are opposite.
inline constexpr std::array<EisensteinInt, kDirections> kUnitDirections{{
    {1, 0},
    {0, 1},
    {-1, 1},
    {-1, 0},
    {0, -1},
    {1, -1},
}};

constexpr int opposite_direction(int k) { return (k + 3) % kDirections; }

/// Cartesian coordinates of the lattice point in the complex plane.
struct PlanePoint {
  double x = 0.0;
  double y = 0.0;
};

inline PlanePoint to_plane(const EisensteinInt& z) {
  // rho = 1/2 + i*sqrt(3)/2
  constexpr double kHalfSqrt3 = 0.86602540378443864676;
  return {static_cast<double>(z.a) + 0.5 * static_cast<double>(z.b), kHalfSqrt3 * static_cast<double>(z.b)};
}

inline std::ostream& operator<<(std::ostream& os, const EisensteinInt& z) {
  return os << '(' << z.a << ',' << z.b << ')';
}

}  // namespace ejlab

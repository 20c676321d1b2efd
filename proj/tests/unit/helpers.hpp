#pragma once

#include <cmath>
#include <vector>

#include <doctest.h>

#include "omech/error.hpp"

namespace testing {

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace testing

// Checks that `expr` throws omech::Error with the given code.
#define CHECK_OMECH_ERROR(expr, expected_code)             \
  do {                                                     \
    bool thrown_ = false;                                  \
    try {                                                  \
      (void)(expr);                                        \
    } catch (const omech::Error& e_) {                     \
      thrown_ = true;                                      \
      CHECK(e_.code() == (expected_code));                 \
    }                                                      \
    CHECK_MESSAGE(thrown_, "expected omech::Error");       \
  } while (0)

#ifndef VOCALSCREEN_TESTS_CHECK_ERROR_HPP_
#define VOCALSCREEN_TESTS_CHECK_ERROR_HPP_

#include "doctest.h"
#include "vocalscreen/error.hpp"

// Asserts that `expr` throws vocalscreen::Error carrying `expected_code`.
#define CHECK_ERROR_CODE(expr, expected_code)                       \
  do {                                                              \
    bool vs_thrown_ = false;                                        \
    try {                                                           \
      (void)(expr);                                                 \
    } catch (const vocalscreen::Error& vs_e_) {                     \
      vs_thrown_ = true;                                            \
      CHECK_MESSAGE(vs_e_.code() == (expected_code), vs_e_.what()); \
    }                                                               \
    CHECK_MESSAGE(vs_thrown_, "expected an error from " #expr);    \
  } while (0)

#endif  // VOCALSCREEN_TESTS_CHECK_ERROR_HPP_

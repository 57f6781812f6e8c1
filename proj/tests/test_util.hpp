#pragma once
// Minimal check harness: CHECK records failures and keeps going; the test's
// main returns test_failures so any failed check fails the ctest entry.
#include <cmath>
#include <cstdio>
#include <string>

inline int test_failures = 0;

#define CHECK(cond)                                                        \
  do {                                                                     \
    if (!(cond)) {                                                         \
      std::printf("FAIL %s:%d  %s\n", __FILE__, __LINE__, #cond);          \
      ++test_failures;                                                     \
    }                                                                      \
  } while (0)

#define CHECK_NEAR(a, b, tol)                                              \
  do {                                                                     \
    double va = (a), vb = (b), vt = (tol);                                 \
    if (!(std::fabs(va - vb) <= vt)) {                                     \
      std::printf("FAIL %s:%d  |%s - %s| = |%.12g - %.12g| > %g\n",        \
                  __FILE__, __LINE__, #a, #b, va, vb, vt);                 \
      ++test_failures;                                                     \
    }                                                                      \
  } while (0)

#define CHECK_THROWS_AS(expr, ex_type)                                     \
  do {                                                                     \
    bool caught = false;                                                   \
    try {                                                                  \
      (void)(expr);                                                        \
    } catch (const ex_type&) {                                             \
      caught = true;                                                       \
    } catch (...) {                                                        \
    }                                                                      \
    if (!caught) {                                                         \
      std::printf("FAIL %s:%d  %s did not throw %s\n", __FILE__, __LINE__, \
                  #expr, #ex_type);                                        \
      ++test_failures;                                                     \
    }                                                                      \
  } while (0)

inline int test_summary(const char* name) {
  if (test_failures == 0)
    std::printf("%s: all checks passed\n", name);
  else
    std::printf("%s: %d check(s) FAILED\n", name, test_failures);
  return test_failures == 0 ? 0 : 1;
}

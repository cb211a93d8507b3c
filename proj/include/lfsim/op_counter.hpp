#pragma once

#include <cstdint>

namespace lfsim {

// Tally of arithmetic operations (add, multiply, divide, compare, min/max)
// executed by instrumented controller code. Stands in for the program-size
// and cycle budget a microcontroller build would be judged on.
struct OpCounter {
  std::uint64_t count = 0;

  void add(std::uint64_t n) { count += n; }
};

// Null-safe helper so step functions can take an optional counter.
inline void tally(OpCounter* ops, std::uint64_t n) {
  if (ops) ops->add(n);
}

}  // namespace lfsim

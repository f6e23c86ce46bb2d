#include "qlsys/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace qlsys {

namespace {

std::atomic<std::size_t> thread_override{0};

}  // namespace

std::size_t assembly_threads() {
  if (const std::size_t t = thread_override.load()) return t;
  static const std::size_t threads = [] {
    const char* env = std::getenv("QLSYS_THREADS");
    if (!env) return std::size_t{1};
    try {
      const long v = std::stol(env);
      return v > 0 ? static_cast<std::size_t>(v) : std::size_t{1};
    } catch (...) {
      return std::size_t{1};
    }
  }();
  return threads;
}

void set_assembly_threads(std::size_t threads) { thread_override.store(threads); }

void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t threads = std::min(assembly_threads(), count / 256 + 1);
  if (threads <= 1) {
    fn(0, count);
    return;
  }
  const std::size_t block = (count + threads - 1) / threads;
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> workers;
    workers.reserve(threads - 1);
    for (std::size_t t = 1; t < threads; ++t) {
      const std::size_t b = std::min(count, t * block);
      const std::size_t e = std::min(count, b + block);
      workers.emplace_back([&fn, &errors, t, b, e] {
        try {
          fn(b, e);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    try {
      fn(0, std::min(count, block));
    } catch (...) {
      errors[0] = std::current_exception();
    }
  }
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

double compensated_sum(std::span<const double> values) {
  double sum = 0.0;
  double carry = 0.0;
  for (double v : values) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      carry += (sum - t) + v;
    } else {
      carry += (v - t) + sum;
    }
    sum = t;
  }
  return sum + carry;
}

}  // namespace qlsys

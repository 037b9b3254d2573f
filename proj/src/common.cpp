#include "conefield/common.hpp"

#include <cstdlib>
#include <mutex>
#include <thread>

namespace conefield {

double unit_sphere_area(int n) {
  if (n < 1) throw PreconditionError("unit_sphere_area: dimension must be >= 1");
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

double fundamental_constant(int n) {
  if (n < 2) throw PreconditionError("fundamental_constant: dimension must be >= 2");
  if (n == 2) return 2.0 * kPi;
  return static_cast<double>(n - 2) * unit_sphere_area(n);
}

double oscillation(const std::vector<double>& values) {
  if (values.empty()) throw PreconditionError("oscillation: empty sample set");
  auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return *hi - *lo;
}

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

double rel_diff(double a, double b, double floor) {
  double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2) throw PreconditionError("linspace: need at least two points");
  std::vector<double> out(count);
  double h = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + h * static_cast<double>(i);
  out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
  if (lo <= 0.0 || hi <= 0.0)
    throw PreconditionError("logspace: endpoints must be positive");
  auto t = linspace(std::log(lo), std::log(hi), count);
  for (double& v : t) v = std::exp(v);
  t.front() = lo;
  t.back() = hi;
  return t;
}

unsigned worker_count() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("CONEFIELD_THREADS")) {
    char* end = nullptr;
    long requested = std::strtol(env, &end, 10);
    if (end != env && requested >= 1)
      return static_cast<unsigned>(std::min<long>(requested, hw));
  }
  return hw;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  unsigned workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace conefield

#ifndef BRMAX_COMMON_HPP
#define BRMAX_COMMON_HPP

#include <cstdint>
#include <cmath>
#include <functional>
#include <future>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

namespace brmax {

// Error raised when a configuration file or CLI invocation is invalid.
// Carries the offending line (0 if not tied to a line) and field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string msg, int line = 0, std::string field = {})
      : std::runtime_error(format(msg, line, field)),
        line_(line),
        field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& msg, int line, const std::string& field) {
    std::string out = "config error";
    if (line > 0) out += " (line " + std::to_string(line) + ")";
    if (!field.empty()) out += " [" + field + "]";
    out += ": " + msg;
    return out;
  }
  int line_;
  std::string field_;
};

// Model construction failures (non-PSD covariance etc.).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& msg) : std::runtime_error("model error: " + msg) {}
};

// Runtime numerical failures (invalid bound constant, sampler stall, ...).
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& msg) : std::runtime_error("numerical error: " + msg) {}
};

// splitmix64 finalizer, used to derive per-stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic random stream. (seed, stream) pairs give independent
// reproducible streams; the generator and the normal transform are pinned
// here rather than taken from <random> distributions so that equal seeds
// give equal draws on any platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    const std::uint64_t k0 = mix64(seed);
    const std::uint64_t k1 = mix64(seed ^ mix64(stream ^ 0xA3EC4E9FD0A5C23BULL));
    std::seed_seq ss{static_cast<std::uint32_t>(k0), static_cast<std::uint32_t>(k0 >> 32),
                     static_cast<std::uint32_t>(k1), static_cast<std::uint32_t>(k1 >> 32)};
    gen_.seed(ss);
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; one spare value is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Stream tags keep the Monte-Carlo estimators' substreams disjoint.
namespace streams {
inline constexpr std::uint64_t kSigma = 1;
inline constexpr std::uint64_t kCInf = 2;
inline constexpr std::uint64_t kRejection = 3;
inline constexpr std::uint64_t kChain = 4;
inline constexpr std::uint64_t kOracleCdf = 5;
inline constexpr std::uint64_t kOracleSample = 6;
inline constexpr std::uint64_t kResample = 7;

inline std::uint64_t block(std::uint64_t tag, std::uint64_t index) {
  return (tag << 32) | index;
}
}  // namespace streams

inline int resolve_threads(int n_threads) {
  if (n_threads > 0) return n_threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc != 0 ? static_cast<int>(hc) : 1;
}

// Fixed number of work blocks for parallel Monte-Carlo loops. Results are
// reduced in block order, so outputs do not depend on the thread count.
inline constexpr int kMcBlocks = 64;

// Replicate range handled by block b when n replicates split into n_blocks.
inline std::pair<long, long> block_range(long n, int n_blocks, int b) {
  const long lo = static_cast<long>((static_cast<long long>(n) * b) / n_blocks);
  const long hi = static_cast<long>((static_cast<long long>(n) * (b + 1)) / n_blocks);
  return {lo, hi};
}

// Runs work(b) for b = 0..n_jobs-1 on at most n_threads concurrent threads
// and feeds the results to reduce(b, partial) strictly in job order.
template <class Work, class Reduce>
void run_ordered_blocks(int n_jobs, int n_threads, Work&& work, Reduce&& reduce) {
  using Partial = std::invoke_result_t<Work&, int>;
  const int t = std::min(resolve_threads(n_threads), std::max(1, n_jobs));
  for (int start = 0; start < n_jobs; start += t) {
    const int end = std::min(n_jobs, start + t);
    std::vector<std::future<Partial>> wave;
    wave.reserve(end - start);
    for (int b = start; b < end; ++b)
      wave.push_back(std::async(std::launch::async, [b, &work] { return work(b); }));
    for (int b = start; b < end; ++b) reduce(b, wave[b - start].get());
  }
}

}  // namespace brmax

#endif  // BRMAX_COMMON_HPP

#pragma once

#include <cmath>
#include <numbers>
#include <cstdint>
#include <random>

namespace democ {

/// Seeded random stream. Identical (seed, stream_id) pairs replay bit-identical
/// draw sequences; distinct stream ids give independent streams via seed_seq mixing.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id), engine_(make_engine(seed, stream_id)) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Child stream for trial or chain `k`, independent of this one.
  RngStream split(std::uint64_t k) const {
    return RngStream(seed_ ^ (0x9E3779B97F4A7C15ULL * (k + 1)), stream_id_ * 1000003ULL + k + 1);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(engine_);
    } while (u <= 0.0);
    return u;
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  /// Gamma with shape `a` and rate `b` (mean a/b).
  double gamma(double a, double b) {
    return std::gamma_distribution<double>(a, 1.0 / b)(engine_);
  }
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
  }
  bool coin() { return (engine_() >> 63) != 0; }

  engine_type& engine() { return engine_; }

 private:
  static engine_type make_engine(std::uint64_t seed, std::uint64_t stream_id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream_id),
                      static_cast<std::uint32_t>(stream_id >> 32), 0x6d656d6fU};
    return engine_type(seq);
  }

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  engine_type engine_;
};

}  // namespace democ

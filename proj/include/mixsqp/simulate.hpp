#pragma once

// Synthetic effect estimates: theta_j ~ 0.5 N(0,1) + 0.2 t_4 + 0.3 t_6,
// z_j = theta_j + N(0,1), s_j = 1.

#include <cstdint>
#include <random>
#include <string_view>

#include "mixsqp/problem.hpp"

namespace mixsqp {

// Observations are generated in blocks of this many rows, each block from
// its own generator seeded by (seed, purpose, block index). Output does not
// depend on how blocks are scheduled.
inline constexpr std::size_t kSimulationBlock = 1024;

// std::mt19937_64 engine plus distribution transforms written out here,
// since the std:: distributions are not specified bit-for-bit across
// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Seed derived from a parent seed, a purpose tag and a stream index.
  static Rng stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index);

  // Uniform on the open interval (0, 1).
  double uniform();
  double normal();
  // Marsaglia-Tsang; shape > 0.
  double gamma(double shape);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Z / sqrt(V / df) with Z ~ N(0,1), V ~ chi-square(df) = 2 Gamma(df/2).
double sample_student_t(double df, Rng& rng);

struct SimulationSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 1;
};

ObservationSet simulate_observations(const SimulationSpec& spec);

}  // namespace mixsqp

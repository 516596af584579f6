#include "mixsqp/simulate.hpp"

#include <cmath>

#include "mixsqp/error.hpp"

namespace mixsqp {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Rng Rng::stream(std::uint64_t seed, std::string_view purpose, std::uint64_t index) {
  const std::uint64_t mixed = splitmix64(splitmix64(seed ^ hash_tag(purpose)) + index);
  return Rng(mixed);
}

double Rng::uniform() {
  // 53 random bits, shifted half a step off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * scale;
  has_spare_ = true;
  return u * scale;
}

double Rng::gamma(double shape) {
  if (!(shape > 0.0)) throw InvalidInput("gamma shape must be positive");
  if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double sample_student_t(double df, Rng& rng) {
  if (!(df > 0.0)) throw InvalidInput("degrees of freedom must be positive");
  const double z = rng.normal();
  const double chi2 = 2.0 * rng.gamma(0.5 * df);
  return z / std::sqrt(chi2 / df);
}

ObservationSet simulate_observations(const SimulationSpec& spec) {
  if (spec.n < 1) throw InvalidInput("simulation size must be at least 1");
  ObservationSet obs;
  obs.z.resize(spec.n);
  obs.s.assign(spec.n, 1.0);
  const std::size_t blocks = (spec.n + kSimulationBlock - 1) / kSimulationBlock;
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    Rng rng = Rng::stream(spec.seed, "observations", b);
    const std::size_t end = std::min(spec.n, (b + 1) * kSimulationBlock);
    for (std::size_t j = b * kSimulationBlock; j < end; ++j) {
      const double pick = rng.uniform();
      double theta;
      if (pick < 0.5) {
        theta = rng.normal();
      } else if (pick < 0.7) {
        theta = sample_student_t(4.0, rng);
      } else {
        theta = sample_student_t(6.0, rng);
      }
      obs.z[j] = theta + rng.normal();
    }
  }
  return obs;
}

}  // namespace mixsqp

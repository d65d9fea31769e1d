#include "hypx/rng.hpp"

#include <cmath>

namespace hypx {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t x = seed;
  for (auto& w : s_) w = splitmix64(x);
}

RngStream RngStream::fork(std::uint64_t label) const {
  std::uint64_t x = seed_ ^ (0xd1b54a32d192ed03ULL + label * 0x2545f4914f6cdd1dULL);
  return RngStream(splitmix64(x));
}

RngStream RngStream::fork(std::string_view label) const { return fork(fnv1a(label)); }

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int RngStream::uniform_int(int n) {
  if (n <= 0) throw ContractError("uniform_int: n must be positive");
  // Lemire's multiply-shift with rejection for exact uniformity.
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  while (true) {
    const std::uint64_t x = next_u64();
    const unsigned __int128 m = static_cast<unsigned __int128>(x) * bound;
    const std::uint64_t lo = static_cast<std::uint64_t>(m);
    if (lo >= bound || lo >= (-bound) % bound) return static_cast<int>(m >> 64);
  }
}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  while (true) {
    const double u = 2.0 * uniform() - 1.0;
    const double v = 2.0 * uniform() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }
}

double RngStream::truncated_normal(double stddev) {
  while (true) {
    const double x = normal();
    if (std::fabs(x) <= 2.0) return stddev * x;
  }
}

Tensor sample_gaussian(RngStream& rng, int n) {
  if (n < 1) throw DimensionError("sample_gaussian: n must be >= 1");
  Tensor t(n, 1);
  for (int i = 0; i < n; ++i) t[i] = rng.normal();
  return t;
}

Tensor sample_hypersphere(RngStream& rng, int n) {
  if (n < 1) throw DimensionError("sample_hypersphere: n must be >= 1");
  while (true) {
    Tensor t = sample_gaussian(rng, n);
    const double nrm = norm2(t);
    if (nrm < 1e-300) continue;  // degenerate draw, resample
    for (int i = 0; i < n; ++i) t[i] /= nrm;
    return t;
  }
}

}  // namespace hypx

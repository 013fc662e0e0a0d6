#include "bcfm/rng.hpp"

#include <array>
#include <bit>
#include <cmath>

namespace bcfm {
namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;  // 2^64 / phi, odd

// Turns an arbitrary word into a usable stream increment: odd, and with
// enough 01/10 bit transitions that the additive orbit is well spread.
std::uint64_t mix_gamma(std::uint64_t z) {
  z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
  z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
  z = (z ^ (z >> 33)) | 1ULL;
  if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
  return z;
}

// ---- ziggurat tables for the standard normal --------------------------------
//
// The positive half-density f(x) = exp(-x^2/2) is covered by 256 horizontal
// slabs of equal area v.  Slab 0 is the base: the rectangle [0, r] x [0, f(r)]
// together with the tail beyond r.  Slab i >= 1 is the rectangle
// [0, x_i] x [f(x_i), f(x_{i+1})] where x_1 = r and the recurrence
// f(x_{i+1}) = f(x_i) + v/x_i makes every slab's area exactly v.  r is chosen
// so the construction closes at the mode: f(x_255) + v/x_255 = 1.  The tables
// are built once at startup from that closure condition rather than copied in
// as literals.

constexpr int kZigLayers = 256;

struct ZigguratTables {
  std::array<double, kZigLayers + 1> x;  // x[0] = v/f(r) (base trick), x[256] = 0
  std::array<double, kZigLayers + 1> f;  // f[i] = exp(-x[i]^2/2) for i >= 1
  std::array<double, kZigLayers> w;      // x[i] / 2^53: scales a 53-bit integer
  std::array<std::uint64_t, kZigLayers> k;  // accept j < k[i] without a curve test
  double r;
  double inv_r;
};

double half_gaussian_tail_area(double r) {
  // integral_r^inf exp(-t^2/2) dt
  return std::sqrt(std::atan(1.0) * 2.0) * std::erfc(r / std::sqrt(2.0));
}

double slab_area(double r) { return r * std::exp(-0.5 * r * r) + half_gaussian_tail_area(r); }

// f(x_255) + v/x_255 - 1 after running the recurrence up from x_1 = r.
// Decreasing in r; the root makes the topmost slab close exactly at f(0) = 1.
double closure_defect(double r) {
  const double v = slab_area(r);
  double x = r;
  double fx = std::exp(-0.5 * r * r);
  for (int i = 1; i <= kZigLayers - 2; ++i) {
    const double fn = fx + v / x;
    if (fn >= 1.0) return 1.0;  // overshot the mode before the last slab
    x = std::sqrt(-2.0 * std::log(fn));
    fx = fn;
  }
  return fx + v / x - 1.0;
}

ZigguratTables build_ziggurat() {
  double lo = 3.0, hi = 4.5;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (closure_defect(mid) > 0.0 ? lo : hi) = mid;
  }
  const double r = 0.5 * (lo + hi);
  const double v = slab_area(r);

  ZigguratTables t;
  t.r = r;
  t.inv_r = 1.0 / r;
  t.x[1] = r;
  t.f[1] = std::exp(-0.5 * r * r);
  t.x[0] = v / t.f[1];  // fictitious base width: makes slab 0 use the same accept test
  t.f[0] = t.f[1];
  for (int i = 2; i <= kZigLayers - 1; ++i) {
    t.f[i] = t.f[i - 1] + v / t.x[i - 1];
    t.x[i] = std::sqrt(-2.0 * std::log(t.f[i]));
  }
  t.x[kZigLayers] = 0.0;
  t.f[kZigLayers] = 1.0;

  const double two53 = 9007199254740992.0;  // 2^53
  for (int i = 0; i < kZigLayers; ++i) {
    t.w[i] = t.x[i] / two53;
    t.k[i] = static_cast<std::uint64_t>(two53 * (t.x[i + 1] / t.x[i]));
  }
  return t;
}

// Built once at load time; only next_normal below touches it, so there is no
// initialization-order hazard.
const ZigguratTables kZig = build_ziggurat();

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed ^ mix64(tag + kGolden));
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  const std::uint64_t h0 = mix64(seed + kGolden);
  const std::uint64_t h1 = mix64(stream_id + 0xbb67ae8584caa73bULL);
  state_ = mix64(h0 ^ (h1 * 0xff51afd7ed558ccdULL + 1ULL));
  gamma_ = mix_gamma(h0 + h1);
}

std::uint64_t RngStream::next_u64() {
  state_ += gamma_;
  return mix64(state_);
}

double RngStream::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_open_uniform() {
  return static_cast<double>((next_u64() >> 11) + 1ULL) * 0x1.0p-53;
}

double RngStream::next_normal() {
  const ZigguratTables& t = kZig;
  while (true) {
    const std::uint64_t bits = next_u64();
    const int layer = static_cast<int>(bits & 0xFF);
    const bool negative = (bits >> 8) & 1ULL;
    const std::uint64_t j = bits >> 11;  // 53 uniform bits, independent of the layer bits
    const double x = static_cast<double>(j) * t.w[layer];
    if (j < t.k[layer]) return negative ? -x : x;  // strictly inside the slab's rectangle
    if (layer == 0) {
      // Base slab, beyond r: exact draw from the tail by exponential rejection.
      double xt, yt;
      do {
        xt = -std::log(next_open_uniform()) * t.inv_r;
        yt = -std::log(next_open_uniform());
      } while (yt + yt < xt * xt);
      return negative ? -(t.r + xt) : (t.r + xt);
    }
    // Wedge between the rectangle and the curve: accept under the density.
    const double y = t.f[layer] + next_uniform() * (t.f[layer + 1] - t.f[layer]);
    if (y < std::exp(-0.5 * x * x)) return negative ? -x : x;
  }
}

}  // namespace bcfm

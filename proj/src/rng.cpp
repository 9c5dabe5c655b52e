#include "vrclt/rng.hpp"

#include <cassert>
#include <cmath>

namespace vrclt {
namespace {

constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(uint32_t c[4], uint32_t k0, uint32_t k1) {
  const uint64_t p0 = static_cast<uint64_t>(kPhiloxM0) * c[0];
  const uint64_t p1 = static_cast<uint64_t>(kPhiloxM1) * c[2];
  const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
  const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
  c[0] = hi1 ^ c[1] ^ k0;
  c[1] = lo1;
  c[2] = hi0 ^ c[3] ^ k1;
  c[3] = lo0;
}

}  // namespace

RngStream::RngStream(uint64_t seed, uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
  uint32_t c[4] = {
      static_cast<uint32_t>(block_),
      static_cast<uint32_t>(block_ >> 32),
      static_cast<uint32_t>(stream_id_),
      static_cast<uint32_t>(stream_id_ >> 32),
  };
  uint32_t k0 = static_cast<uint32_t>(seed_);
  uint32_t k1 = static_cast<uint32_t>(seed_ >> 32);
  for (int r = 0; r < 10; ++r) {
    philox_round(c, k0, k1);
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  for (int i = 0; i < 4; ++i) buf_[i] = c[i];
  buf_pos_ = 0;
  ++block_;
}

uint64_t RngStream::next_u64() {
  if (buf_pos_ > 2) refill();
  const uint64_t lo = buf_[buf_pos_];
  const uint64_t hi = buf_[buf_pos_ + 1];
  buf_pos_ += 2;
  return (hi << 32) | lo;
}

double RngStream::next_uniform() {
  // 53 random bits centered in (0,1): never 0, never 1.
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::next_normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_uniform();
  const double u2 = next_uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

void RngStream::fill_normal(Vector& out) {
  for (auto& x : out) x = next_normal();
}

Vector mvn_sample(const Vector& mean, const Matrix& cov_lower, RngStream& rng) {
  const int n = static_cast<int>(mean.size());
  assert(cov_lower.rows() == n && cov_lower.cols() == n);
  Vector z(n);
  rng.fill_normal(z);
  Vector x = mean;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j <= i; ++j) s += cov_lower(i, j) * z[j];
    x[i] += s;
  }
  return x;
}

}  // namespace vrclt

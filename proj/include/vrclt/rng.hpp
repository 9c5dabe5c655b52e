#pragma once

#include <cstdint>

#include "vrclt/matrix.hpp"

namespace vrclt {

// Counter-based PRNG (Philox4x32-10). The 64-bit seed keys the generator and
// the 64-bit stream id occupies the high half of the counter block, so any
// (seed, stream_id) pair yields a reproducible stream independent of every
// other stream id, with no shared state. Plain value type: copying a stream
// replays it.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id);

  uint64_t seed() const { return seed_; }
  uint64_t stream_id() const { return stream_id_; }

  uint64_t next_u64();
  // Uniform on the open interval (0, 1); safe under log().
  double next_uniform();
  // Standard normal via Box-Muller; the paired draw is cached.
  double next_normal();
  // Fills out with iid standard normals.
  void fill_normal(Vector& out);

 private:
  void refill();

  uint64_t seed_ = 0;
  uint64_t stream_id_ = 0;
  uint64_t block_ = 0;     // Philox counter (low half of the counter block)
  uint32_t buf_[4] = {};   // last generated block
  int buf_pos_ = 4;        // consumed words in buf_
  double spare_ = 0.0;     // cached Box-Muller partner
  bool has_spare_ = false;
};

// mean + L z with z iid standard normal; cov_lower is the Cholesky factor of
// the target covariance. Consumes exactly dim normals from the stream.
Vector mvn_sample(const Vector& mean, const Matrix& cov_lower, RngStream& rng);

}  // namespace vrclt

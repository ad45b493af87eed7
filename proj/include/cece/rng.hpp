#pragma once

#include <array>
#include <cstdint>

namespace cece {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// A pure function of (counter, key); no state is shared between streams.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter block(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
             static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
             static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// Draw domains separate independent uses of the same seed.
enum class RngDomain : std::uint32_t {
  point_trial = 1,
  survival_trial = 2,
  misclassification = 3,
  coverage = 4,
};

// Stream-splitting rule: key = (seed low word, seed high word ^ domain
// constant), counter = (draw index low, draw index high, stream low, stream
// high). One stream per subject index, so a subject's draws do not depend on
// how subjects are scheduled across threads.
class SubjectStream {
 public:
  SubjectStream(std::uint64_t seed, RngDomain domain, std::uint64_t stream) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32) ^
                 (static_cast<std::uint32_t>(domain) * 0x85EBCA6Bu)},
        stream_(stream) {}

  std::uint64_t next_u64() noexcept {
    if (cursor_ == 2) refill();
    const std::uint64_t v = (std::uint64_t{buffer_[2 * cursor_]} << 32) | buffer_[2 * cursor_ + 1];
    ++cursor_;
    return v;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  void refill() noexcept {
    buffer_ = Philox4x32::block({static_cast<std::uint32_t>(draw_), static_cast<std::uint32_t>(draw_ >> 32),
                                 static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32)},
                                key_);
    ++draw_;
    cursor_ = 0;
  }

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t draw_ = 0;
  Philox4x32::Counter buffer_{};
  int cursor_ = 2;
};

}  // namespace cece

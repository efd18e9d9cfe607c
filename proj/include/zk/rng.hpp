#pragma once

#include <array>
#include <cstdint>

namespace zk {

/// Philox4x32-10 block function: a keyed bijection on 128-bit counters.
/// Output depends only on (key, counter), so streams can be consumed in any
/// order and by any worker without changing the draws.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

/// Per-trajectory seed, a hash of (master seed, trajectory id).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trajectory_id);

PhiloxKey key_from_seed(std::uint64_t seed);

/// Two standard normals (Box-Muller) from one block at the given counter.
std::array<double, 2> normal_pair(PhiloxKey key, PhiloxCounter counter);

/// Standard normal keyed by (stream seed, step, channel).
double keyed_normal(std::uint64_t seed, std::uint64_t step, std::uint32_t channel);

/// A sequential view onto a counter-based stream. Copying it forks the
/// position, which is what replay needs.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) : key_(key_from_seed(seed)), stream_(stream) {}

    double normal();
    std::uint64_t position() const { return position_; }

private:
    PhiloxKey key_;
    std::uint64_t stream_;
    std::uint64_t position_ = 0;
};

}  // namespace zk

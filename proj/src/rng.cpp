#include "zk/rng.hpp"

#include <cmath>

namespace zk {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// uniform in (0, 1], 53 bits
inline double to_unit(std::uint32_t hi, std::uint32_t lo)
{
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t trajectory_id)
{
    return splitmix64(master_seed ^ splitmix64(trajectory_id));
}

PhiloxKey key_from_seed(std::uint64_t seed)
{
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

std::array<double, 2> normal_pair(PhiloxKey key, PhiloxCounter counter)
{
    const PhiloxCounter r = philox4x32(counter, key);
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * 3.14159265358979323846 * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

double keyed_normal(std::uint64_t seed, std::uint64_t step, std::uint32_t channel)
{
    const PhiloxCounter ctr{static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(step >> 32), channel / 2, 0u};
    return normal_pair(key_from_seed(seed), ctr)[channel % 2];
}

double CounterRng::normal()
{
    const std::uint64_t block = position_ / 2;
    const PhiloxCounter ctr{static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                            static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32) | 0x80000000u};
    const double z = normal_pair(key_, ctr)[position_ % 2];
    ++position_;
    return z;
}

}  // namespace zk

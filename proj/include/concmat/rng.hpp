#pragma once

#include <array>
#include <cstdint>

namespace concmat::ensembles {

/// Philox4x32 with 10 rounds: a keyed bijection on 128-bit counters.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Mixes two 64-bit words into a stream id (splitmix64 finalizer applied to
/// each word in turn).
std::uint64_t stream_hash(std::uint64_t a, std::uint64_t b);

/// Counter-based random stream. The key is the seed, the upper half of the
/// counter is the stream id and the lower half counts blocks, so streams with
/// distinct ids never overlap and any (seed, id) pair can be recreated on any
/// thread. Cheap to copy.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Uniform on (0, 1).
    double uniform_open();
    /// Standard normal by the Box-Muller transform.
    double normal();

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace concmat::ensembles

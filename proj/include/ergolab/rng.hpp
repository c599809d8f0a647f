#pragma once

#include <array>
#include <cstdint>

namespace ergolab {

struct Seed {
    std::uint64_t value = 0;
};

/// Philox4x32 with 10 rounds (Salmon et al., SC'11). Pure function of
/// (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Random stream for one logical sample. The stream is keyed by
/// (seed, stream, index), so draws for sample i never depend on how many
/// other samples were drawn before it or on which thread drew them.
class CounterRng {
public:
    CounterRng(Seed seed, std::uint32_t stream, std::uint64_t index);

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int pos_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

} // namespace ergolab

#pragma once

#include "pdmdp/types.hpp"

#include <cstdint>
#include <string>

namespace pdmdp {

/// SplitMix64: the fixed project-wide generator, chosen for trivially
/// portable 64-bit arithmetic. State advances by 0x9E3779B97F4A7C15 per
/// draw; output is the standard 30/27/31 xor-shift multiply mix.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

struct GeneratorSpec {
    int n = 2;
    int m = 2;
    double gamma = 0.9;
    std::uint64_t seed = 0;
    double sparsity = 1.0; // expected fraction of nonzero entries per row
    double cost_lo = 0.0;
    double cost_hi = 1.0;
};

/// Reads and validates an instance file (row-sum tolerance 1e-9 on load;
/// out-of-tolerance rows are an error, never renormalized). Throws
/// ParseError with the byte offset or ValidationError naming the row.
MdpInstance load(const std::string& path);

/// Writes the canonical JSON format with numbers at 17 significant digits,
/// which round-trips doubles exactly. Throws IoError.
void save(const MdpInstance& inst, const std::string& path);

/// Seed-deterministic random instance. Each row draws its support by
/// Bernoulli(sparsity) with at least one forced entry, fills it with
/// uniforms, and normalizes with the last support entry absorbing the
/// rounding residue so row sums are exact. Costs are uniform in
/// [cost_lo, cost_hi].
MdpInstance random_mdp(const GeneratorSpec& spec);

} // namespace pdmdp

#pragma once

#include "smoothlab/attention.hpp"

#include <cstdint>
#include <random>

namespace smoothlab {

using Rng = std::mt19937_64;

// Independent generator for (campaign seed, trial index, stream); identical
// regardless of the order trials are evaluated in.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream = 0);

RealMatrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng);
Index uniform_index(Index lo, Index hi, Rng& rng);

struct SampledAttention {
    AttentionMatrix attention;
    int rejections = 0;   ///< draws discarded for a complex or ill-conditioned spectrum
};

// Logits ~ N(0, 1); redraws until the validated invariants hold.
SampledAttention sample_attention(Index n, Rng& rng, const Tolerances& tol = {}, int max_draws = 100000);

// Raw H entries ~ N(0, 1/√d).
RealMatrix sample_raw_h(Index d, Rng& rng);

} // namespace smoothlab

#include "smoothlab/sampling.hpp"

#include "smoothlab/errors.hpp"

#include <cmath>

namespace smoothlab {

Rng trial_rng(std::uint64_t seed, std::uint64_t trial, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(stream)};
    return Rng(seq);
}

RealMatrix normal_matrix(Index rows, Index cols, double stddev, Rng& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    RealMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j)
            m(i, j) = dist(rng);
    return m;
}

Index uniform_index(Index lo, Index hi, Rng& rng) {
    return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

SampledAttention sample_attention(Index n, Rng& rng, const Tolerances& tol, int max_draws) {
    if (n < 1)
        raise(ErrorKind::InvalidArgument, "n must be at least 1");
    for (int draw = 0; draw < max_draws; ++draw) {
        try {
            return {attention_from_logits(normal_matrix(n, n, 1.0, rng), tol), draw};
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::ComplexSpectrum && e.kind() != ErrorKind::NotDiagonalizable)
                throw;
        }
    }
    raise(ErrorKind::NonConvergence, "no attention matrix with a real spectrum after " + std::to_string(max_draws) +
                                         " draws");
}

RealMatrix sample_raw_h(Index d, Rng& rng) { return normal_matrix(d, d, 1.0 / std::sqrt(double(d)), rng); }

} // namespace smoothlab

#pragma once

#include "smoothlab/linalg.hpp"

#include <random>

namespace smoothlab {

enum class ReparamMode { sharpen, smooth };

const char* to_string(ReparamMode m) noexcept;

struct ClipBounds {
    double lower;
    double upper;
};

// sharpen: [−1, 0]; smooth: [0, 1].
ClipBounds clip_bounds(ReparamMode mode) noexcept;

struct ReparamValueProjection {
    RealMatrix v_h;
    RealVector psi;
    ReparamMode mode = ReparamMode::smooth;
    RealMatrix realized_h;             ///< V_H diag(clip ψ) V_H⁻¹
    double v_condition = 1.0;
    double eigenvalue_match = 0.0;     ///< multiset distance between eig(realized_h) and clip ψ
    bool has_zero_eigenvalue = false;  ///< a clipped value is exactly 0 (outside the clip-range dominance guarantee)
};

RealVector clip(const RealVector& psi, double lower, double upper);

ReparamValueProjection build_reparam(const RealMatrix& v_h, const RealVector& psi, ReparamMode mode,
                                     const Tolerances& tol = {});

struct ReparamInit {
    RealMatrix v_h;   ///< entries ~ N(0, √(2/d))
    RealVector psi;   ///< entries ~ N(0, 0.1)
};

ReparamInit init_reparam(Index d, std::mt19937_64& rng, const Tolerances& tol = {});
ReparamInit init_reparam(Index d, std::uint64_t seed, const Tolerances& tol = {});

RealMatrix he_matrix(Index d, std::mt19937_64& rng);
RealVector init_psi(Index d, std::mt19937_64& rng);

} // namespace smoothlab

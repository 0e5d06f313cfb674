#pragma once

#include "smoothlab/attention.hpp"
#include "smoothlab/metrics.hpp"

#include <optional>
#include <vector>

namespace smoothlab {

enum class LnMode { none, pre_ln, post_ln };

const char* to_string(LnMode m) noexcept;

struct LayerNormParams {
    RealVector gamma;
    RealVector beta;
    double epsilon = 1e-5;
};

struct UpdateConfig {
    bool residual = true;
    LnMode ln_mode = LnMode::none;
    std::optional<LayerNormParams> ln_params;
    int depth = 2000;
    int record_every = 10;
    bool renormalize = true;   ///< rescale to unit Frobenius norm each step; only with ln_mode none
};

struct TrajectoryRecord {
    int layer = 0;
    SmoothingMetrics metrics;
    double frobenius_log = 0.0;     ///< ln(‖X_ℓ‖_F / ‖X_0‖_F), accumulated from the per-step scales
    double direction_delta = 0.0;   ///< ‖X̂_ℓ − X̂_{ℓ−1}‖_F between normalized iterates
};

struct Trajectory {
    std::vector<TrajectoryRecord> records;
    RealMatrix final_direction;     ///< X_L / ‖X_L‖_F
    double final_frobenius_log = 0.0;
};

void validate(const UpdateConfig& cfg, Index d);

// Rowwise (x − mean)/sqrt(var + ε) ⊙ γ + β with population variance.
RealMatrix layer_norm(const RealMatrix& x, const LayerNormParams& ln);

// X + A X Hᵀ (or A X Hᵀ without the residual), so vec(X') = (I + H⊗A) vec(X).
RealMatrix step(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h, const UpdateConfig& cfg);
RealMatrix step_pre_ln(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h, const LayerNormParams& ln);
RealMatrix step_post_ln(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h, const LayerNormParams& ln);

Trajectory run(const RealMatrix& x0, const AttentionMatrix& a, const RealMatrix& h, const UpdateConfig& cfg);

} // namespace smoothlab

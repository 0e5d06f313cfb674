#include "smoothlab/dynamics.hpp"

#include "smoothlab/errors.hpp"

#include <cmath>
#include <string>

namespace smoothlab {

namespace {

constexpr double kOverflow = 1e300;

void check_shapes(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h) {
    if (x.rows() != a.n() || h.rows() != h.cols() || h.cols() != x.cols())
        raise(ErrorKind::InvalidArgument, "token matrix, attention and H shapes disagree");
}

void check_ln(const LayerNormParams& ln, Index d) {
    if (ln.gamma.size() != d || ln.beta.size() != d)
        raise(ErrorKind::InvalidArgument, "LayerNorm parameter length differs from d");
    if (!(ln.epsilon > 0.0))
        raise(ErrorKind::InvalidArgument, "LayerNorm epsilon must be positive");
}

void check_bounded(const RealMatrix& x, int layer) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kOverflow)
        raise(ErrorKind::Overflow, "iterate left the representable range at layer " + std::to_string(layer) +
                                       "; enable renormalize");
}

} // namespace

const char* to_string(LnMode m) noexcept {
    switch (m) {
    case LnMode::none: return "none";
    case LnMode::pre_ln: return "pre_ln";
    case LnMode::post_ln: return "post_ln";
    }
    return "unknown";
}

void validate(const UpdateConfig& cfg, Index d) {
    if (cfg.depth < 1)
        raise(ErrorKind::InvalidConfig, "depth must be at least 1");
    if (cfg.record_every < 1)
        raise(ErrorKind::InvalidConfig, "record_every must be at least 1");
    if ((cfg.ln_mode == LnMode::none) == cfg.ln_params.has_value())
        raise(ErrorKind::InvalidConfig, "ln_params must be present exactly when ln_mode is not none");
    if (cfg.ln_params)
        check_ln(*cfg.ln_params, d);
    if (cfg.ln_mode != LnMode::none && cfg.renormalize)
        raise(ErrorKind::InvalidConfig, "renormalize changes LayerNorm dynamics (LN is scale-invariant); disable it");
    if (cfg.ln_mode != LnMode::none && !cfg.residual)
        raise(ErrorKind::InvalidConfig, "LayerNorm updates are defined with the residual connection");
}

RealMatrix layer_norm(const RealMatrix& x, const LayerNormParams& ln) {
    check_ln(ln, x.cols());
    RealMatrix out(x.rows(), x.cols());
    const double d = double(x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
        const double mean = x.row(i).mean();
        const auto centered = x.row(i).array() - mean;
        const double var = centered.square().sum() / d;
        out.row(i) = centered / std::sqrt(var + ln.epsilon) * ln.gamma.transpose().array() +
                     ln.beta.transpose().array();
    }
    return out;
}

RealMatrix step(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h, const UpdateConfig& cfg) {
    check_shapes(x, a, h);
    if (cfg.ln_mode != LnMode::none)
        raise(ErrorKind::InvalidArgument, "step is the LayerNorm-free update");
    RealMatrix branch = a.a * x * h.transpose();
    return cfg.residual ? RealMatrix(x + branch) : branch;
}

RealMatrix step_pre_ln(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h, const LayerNormParams& ln) {
    check_shapes(x, a, h);
    return x + a.a * layer_norm(x, ln) * h.transpose();
}

RealMatrix step_post_ln(const RealMatrix& x, const AttentionMatrix& a, const RealMatrix& h, const LayerNormParams& ln) {
    check_shapes(x, a, h);
    return layer_norm(x + a.a * x * h.transpose(), ln);
}

Trajectory run(const RealMatrix& x0, const AttentionMatrix& a, const RealMatrix& h, const UpdateConfig& cfg) {
    check_shapes(x0, a, h);
    validate(cfg, x0.cols());
    require_finite(x0, "X0");
    const double x0_norm = x0.stableNorm();
    if (!(x0_norm > 0.0))
        raise(ErrorKind::Degenerate, "X0 is zero");

    Trajectory traj;
    traj.records.reserve(static_cast<std::size_t>(cfg.depth / cfg.record_every + 1));
    RealMatrix x = cfg.renormalize ? RealMatrix(x0 / x0_norm) : x0;
    RealMatrix prev_dir = x0 / x0_norm;
    double log_scale = 0.0;
    double last_norm = x0_norm;
    for (int layer = 1; layer <= cfg.depth; ++layer) {
        switch (cfg.ln_mode) {
        case LnMode::none: x = step(x, a, h, cfg); break;
        case LnMode::pre_ln: x = step_pre_ln(x, a, h, *cfg.ln_params); break;
        case LnMode::post_ln: x = step_post_ln(x, a, h, *cfg.ln_params); break;
        }
        check_bounded(x, layer);
        const double norm = x.stableNorm();
        if (!(norm > 0.0))
            raise(ErrorKind::Degenerate, "iterate collapsed to zero at layer " + std::to_string(layer));
        if (cfg.renormalize) {
            log_scale += std::log(norm);
            x /= norm;
        } else {
            log_scale += std::log(norm / last_norm);
            last_norm = norm;
        }
        const RealMatrix dir = cfg.renormalize ? x : RealMatrix(x / norm);
        const double delta = (dir - prev_dir).norm();
        prev_dir = dir;
        if (layer % cfg.record_every == 0 || layer == cfg.depth)
            traj.records.push_back({layer, metrics_of(dir), log_scale, delta});
    }
    traj.final_direction = prev_dir;
    traj.final_frobenius_log = log_scale;
    return traj;
}

} // namespace smoothlab

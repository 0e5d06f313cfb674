#include "smoothlab/reparam.hpp"

#include "smoothlab/errors.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <vector>

namespace smoothlab {

namespace {

constexpr int kMaxResamples = 16;

double real_condition(const RealMatrix& m) {
    const RealVector s = singular_values(m);
    const double lo = s[s.size() - 1];
    return lo > 0.0 ? s[0] / lo : std::numeric_limits<double>::infinity();
}

} // namespace

const char* to_string(ReparamMode m) noexcept { return m == ReparamMode::sharpen ? "sharpen" : "smooth"; }

ClipBounds clip_bounds(ReparamMode mode) noexcept {
    return mode == ReparamMode::sharpen ? ClipBounds{-1.0, 0.0} : ClipBounds{0.0, 1.0};
}

RealVector clip(const RealVector& psi, double lower, double upper) {
    if (!(lower <= upper))
        raise(ErrorKind::InvalidArgument, "clip bounds out of order");
    return psi.cwiseMax(lower).cwiseMin(upper);
}

ReparamValueProjection build_reparam(const RealMatrix& v_h, const RealVector& psi, ReparamMode mode,
                                     const Tolerances& tol) {
    if (v_h.rows() != v_h.cols() || v_h.rows() != psi.size() || psi.size() == 0)
        raise(ErrorKind::InvalidArgument, "V_H must be d×d with ψ of length d");
    require_finite(v_h, "V_H");
    require_finite(psi, "psi");

    ReparamValueProjection out;
    out.v_h = v_h;
    out.psi = psi;
    out.mode = mode;
    out.v_condition = real_condition(v_h);
    if (!(out.v_condition < tol.diagonalizable_condition))
        raise(ErrorKind::SingularBasis, "V_H condition " + std::to_string(out.v_condition));
    const auto [lo, hi] = clip_bounds(mode);
    const RealVector lambda = clip(psi, lo, hi);
    out.has_zero_eigenvalue = (lambda.array() == 0.0).any();
    out.realized_h = v_h * lambda.asDiagonal() * inverse(v_h, tol);

    const ComplexVector got = eigenvalues_general(out.realized_h, tol);
    std::vector<Complex> want(lambda.begin(), lambda.end());
    out.eigenvalue_match = multiset_distance(std::vector<Complex>(got.begin(), got.end()), want);
    const double allowed = out.v_condition < 1e6 ? 1e-8 : 1e-6;
    if (!(out.eigenvalue_match <= allowed))
        raise(ErrorKind::NonConvergence, "realized H eigenvalues deviate from clip(ψ) by " +
                                             std::to_string(out.eigenvalue_match));
    return out;
}

RealMatrix he_matrix(Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / double(d)));
    RealMatrix v(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j)
            v(i, j) = dist(rng);
    return v;
}

RealVector init_psi(Index d, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 0.1);
    RealVector psi(d);
    for (Index i = 0; i < d; ++i)
        psi[i] = dist(rng);
    return psi;
}

ReparamInit init_reparam(Index d, std::mt19937_64& rng, const Tolerances& tol) {
    if (d < 1)
        raise(ErrorKind::InvalidArgument, "d must be at least 1");
    for (int attempt = 0; attempt <= kMaxResamples; ++attempt) {
        RealMatrix v = he_matrix(d, rng);
        if (real_condition(v) < tol.diagonalizable_condition)
            return {std::move(v), init_psi(d, rng)};
    }
    raise(ErrorKind::SingularBasis, "He-initialized V_H stayed ill-conditioned after resampling");
}

ReparamInit init_reparam(Index d, std::uint64_t seed, const Tolerances& tol) {
    std::mt19937_64 rng(seed);
    return init_reparam(d, rng, tol);
}

} // namespace smoothlab

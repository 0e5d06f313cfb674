#include "smoothlab/metrics.hpp"

#include "smoothlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace smoothlab {

namespace {

constexpr double kTiny = 1e-300;

double ratio_of_norms(double high, double low) {
    if (high <= kTiny && low <= kTiny)
        raise(ErrorKind::Degenerate, "both frequency components vanish; HFC/LFC undefined");
    if (high <= kTiny)
        return 0.0;
    if (low <= kTiny)
        return std::numeric_limits<double>::infinity();
    return high / low;
}

} // namespace

double hfc_lfc_ratio(const RealMatrix& x) {
    if (x.rows() < 1)
        raise(ErrorKind::NotApplicable, "HFC/LFC needs at least one row");
    const RealMatrix low = RealVector::Ones(x.rows()) * x.colwise().mean();
    return ratio_of_norms((x - low).stableNorm(), low.stableNorm());
}

DftProjectors build_dft_projectors(Index n) {
    if (n < 1)
        raise(ErrorKind::InvalidArgument, "DFT size must be positive");
    ComplexMatrix f(n, n);
    for (Index k = 0; k < n; ++k)
        for (Index l = 0; l < n; ++l)
            f(k, l) = std::polar(1.0, -2.0 * std::numbers::pi * double(k * l % n) / double(n));
    const ComplexMatrix f_inv = f.adjoint() / double(n);
    ComplexVector keep_low = ComplexVector::Zero(n);
    keep_low[0] = 1.0;
    const ComplexVector keep_high = ComplexVector::Ones(n) - keep_low;
    return {(f_inv * keep_low.asDiagonal() * f).real(), (f_inv * keep_high.asDiagonal() * f).real()};
}

double hfc_lfc_ratio(const RealMatrix& x, const DftProjectors& projectors) {
    if (projectors.lfc.rows() != x.rows())
        raise(ErrorKind::InvalidArgument, "projector size does not match token count");
    return ratio_of_norms((projectors.hfc * x).stableNorm(), (projectors.lfc * x).stableNorm());
}

double mean_cosine_similarity(const RealMatrix& x) {
    const Index n = x.rows();
    if (n < 2)
        raise(ErrorKind::NotApplicable, "mean cosine needs at least two rows");
    const RealVector norms = x.rowwise().norm();
    double total = 0.0;
    long pairs = 0;
    for (Index i = 0; i < n; ++i) {
        if (norms[i] <= kTiny)
            continue;
        for (Index j = i + 1; j < n; ++j) {
            if (norms[j] <= kTiny)
                continue;
            total += x.row(i).dot(x.row(j)) / (norms[i] * norms[j]);
            ++pairs;
        }
    }
    if (pairs == 0)
        raise(ErrorKind::Degenerate, "every row pair involves a zero row");
    return std::clamp(total / double(pairs), -1.0, 1.0);
}

double effective_rank_from_sigma(const RealVector& sigma) {
    const double total = sigma.sum();
    if (!(total > 0.0))
        raise(ErrorKind::Degenerate, "effective rank of the zero matrix");
    double entropy = 0.0;
    for (double s : sigma) {
        const double p = s / total;
        if (p > 0.0)
            entropy -= p * std::log(p);
    }
    return std::clamp(std::exp(entropy), 1.0, double(sigma.size()));
}

double effective_rank(const RealMatrix& x) {
    return effective_rank_from_sigma(singular_values(x));
}

SmoothingMetrics metrics_of(const RealMatrix& x) {
    if (x.rows() < 2)
        raise(ErrorKind::NotApplicable, "metrics need at least two tokens");
    return {hfc_lfc_ratio(x), mean_cosine_similarity(x), effective_rank(x)};
}

} // namespace smoothlab

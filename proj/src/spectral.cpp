#include "smoothlab/spectral.hpp"

#include "smoothlab/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace smoothlab {

namespace {

constexpr double kSideTol = 1e-9;
constexpr double kZeroA1 = 1e-12;

bool in_right_half(Complex z) { return std::abs(phase(z)) <= std::numbers::pi / 2; }

struct Sides {
    double a_first = 0.0;   ///< λ^A_1, smallest attention eigenvalue
    double a_last = 0.0;    ///< λ^A_n, the Perron value
    bool first(double a) const { return std::abs(a - a_first) <= kSideTol; }
    bool last(double a) const { return std::abs(a - a_last) <= kSideTol; }
};

Sides attention_sides(const CombinedSpectrum& cs) {
    Sides s{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& e : cs.entries) {
        s.a_first = std::min(s.a_first, e.lambda_a);
        s.a_last = std::max(s.a_last, e.lambda_a);
    }
    return s;
}

std::vector<Complex> h_values(const CombinedSpectrum& cs) {
    Index count = 0;
    for (const auto& e : cs.entries)
        count = std::max(count, e.j + 1);
    std::vector<Complex> out(static_cast<std::size_t>(count));
    for (const auto& e : cs.entries)
        out[static_cast<std::size_t>(e.j)] = e.lambda_h;
    return out;
}

// H indices attaining max of score within the relative tie tolerance.
template <class Score>
std::set<Index> argmax_set(const std::vector<Complex>& hv, const std::vector<Index>& pool, Score score,
                           double tie, double* best_out) {
    double best = -std::numeric_limits<double>::infinity();
    for (Index j : pool)
        best = std::max(best, score(hv[static_cast<std::size_t>(j)]));
    std::set<Index> out;
    for (Index j : pool)
        if (best - score(hv[static_cast<std::size_t>(j)]) <= tie * std::abs(best))
            out.insert(j);
    if (best_out)
        *best_out = best;
    return out;
}

// Entries realized by (H index set, attention side).
std::set<std::size_t> entries_for(const CombinedSpectrum& cs, const Sides& sides, const std::set<Index>& js,
                                  bool last_side) {
    std::set<std::size_t> out;
    for (std::size_t k = 0; k < cs.entries.size(); ++k) {
        const auto& e = cs.entries[k];
        const bool on_side = last_side ? sides.last(e.lambda_a) : sides.first(e.lambda_a);
        if (on_side && js.count(e.j))
            out.insert(k);
    }
    return out;
}

std::string describe(const CombinedSpectrum& cs, const std::set<std::size_t>& ks) {
    std::ostringstream os;
    os << "{";
    for (std::size_t k : ks)
        os << " (j=" << cs.entries[k].j << ", λa=" << cs.entries[k].lambda_a << ", |μ|="
           << std::abs(cs.entries[k].mu) << ")";
    os << " }";
    return os.str();
}

} // namespace

const char* to_string(CaseBranch b) noexcept {
    switch (b) {
    case CaseBranch::A1_pos_big: return "A1_pos_big";
    case CaseBranch::A1_pos_small: return "A1_pos_small";
    case CaseBranch::A1_neg_phase_in: return "A1_neg_phase_in";
    case CaseBranch::A1_neg_phase_out: return "A1_neg_phase_out";
    case CaseBranch::tie: return "tie";
    case CaseBranch::no_residual: return "no_residual";
    }
    return "unknown";
}

const char* to_string(DominantType t) noexcept {
    switch (t) {
    case DominantType::type1_smoothing: return "type1_smoothing";
    case DominantType::type2_sharpening: return "type2_sharpening";
    case DominantType::mixed: return "mixed";
    }
    return "unknown";
}

const char* to_string(Theorem3Case c) noexcept {
    switch (c) {
    case Theorem3Case::case1: return "case1";
    case Theorem3Case::case2: return "case2";
    case Theorem3Case::case3a: return "case3a";
    case Theorem3Case::case3ab: return "case3ab";
    case Theorem3Case::indeterminate: return "indeterminate";
    }
    return "unknown";
}

const char* to_string(ClipRange c) noexcept {
    switch (c) {
    case ClipRange::sharpening: return "sharpening";
    case ClipRange::smoothing: return "smoothing";
    case ClipRange::unclassified: return "unclassified";
    }
    return "unknown";
}

const char* to_string(ResidualMode m) noexcept {
    return m == ResidualMode::with_residual ? "with_residual" : "no_residual";
}

double phase(Complex z) {
    if (z.imag() == 0.0 && z.real() < 0.0)
        return std::numbers::pi;
    return std::arg(z);
}

EigenDecomposition h_spectrum(const RealMatrix& h, const Tolerances& tol) {
    EigenDecomposition raw = eig_general(h, tol);
    std::vector<Index> order(static_cast<std::size_t>(raw.size));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        const Complex la = raw.eigenvalues[a], lb = raw.eigenvalues[b];
        const double ma = std::abs(1.0 + la), mb = std::abs(1.0 + lb);
        if (ma != mb)
            return ma < mb;
        if (la.real() != lb.real())
            return la.real() < lb.real();
        return la.imag() < lb.imag();
    });
    EigenDecomposition out = raw;
    for (Index k = 0; k < raw.size; ++k) {
        out.eigenvalues[k] = raw.eigenvalues[order[static_cast<std::size_t>(k)]];
        out.right_eigenvectors.col(k) = raw.right_eigenvectors.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

CombinedSpectrum combined_spectrum(const EigenDecomposition& spec_h, const EigenDecomposition& spec_a,
                                   ResidualMode mode) {
    CombinedSpectrum cs;
    cs.residual_mode = mode;
    cs.entries.reserve(static_cast<std::size_t>(spec_h.size * spec_a.size));
    for (Index i = 0; i < spec_a.size; ++i) {
        const double la = spec_a.eigenvalues[i].real();
        for (Index j = 0; j < spec_h.size; ++j) {
            const Complex lh = spec_h.eigenvalues[j];
            const Complex mu = mode == ResidualMode::with_residual ? 1.0 + lh * la : lh * la;
            cs.entries.push_back({i, j, la, lh, mu});
        }
    }
    std::stable_sort(cs.entries.begin(), cs.entries.end(),
                     [](const SpectrumEntry& x, const SpectrumEntry& y) { return std::abs(x.mu) > std::abs(y.mu); });
    return cs;
}

DominanceReport classify_dominance(const CombinedSpectrum& cs, const Tolerances& tol) {
    if (cs.entries.empty())
        raise(ErrorKind::InvalidArgument, "empty combined spectrum");
    DominanceReport rep;
    rep.tie_tolerance_used = tol.tie;

    double top = 0.0;
    for (const auto& e : cs.entries)
        top = std::max(top, std::abs(e.mu));
    rep.max_modulus = top;
    const double tie_abs = tol.tie * top;
    double second = -1.0;
    for (std::size_t k = 0; k < cs.entries.size(); ++k) {
        const double m = std::abs(cs.entries[k].mu);
        if (top - m <= tie_abs)
            rep.dominating.push_back(k);
        else
            second = std::max(second, m);
    }
    if (second < 0.0 || second == 0.0)
        rep.gap_ratio = std::numeric_limits<double>::infinity();
    else
        rep.gap_ratio = top / second;
    for (std::size_t k : rep.dominating) {
        const Complex mu = cs.entries[k].mu;
        if (std::abs(mu.imag()) > tol.oscillation * std::abs(mu))
            rep.oscillatory = true;
    }

    const Sides sides = attention_sides(cs);
    const std::set<std::size_t> direct(rep.dominating.begin(), rep.dominating.end());
    bool has_first = false, has_last = false, off_side = false;
    for (std::size_t k : direct) {
        const double a = cs.entries[k].lambda_a;
        const bool is_last = sides.last(a), is_first = sides.first(a);
        has_last = has_last || is_last;
        has_first = has_first || (is_first && !is_last);
        off_side = off_side || (!is_last && !is_first);
    }
    if (has_last && !has_first)
        rep.dominant_type = DominantType::type1_smoothing;
    else if (has_first && !has_last && !off_side)
        rep.dominant_type = DominantType::type2_sharpening;
    else
        rep.dominant_type = DominantType::mixed;

    // All |μ| zero: every entry ties and there is no branch to check.
    if (top == 0.0) {
        rep.case_branch = rep.table_branch =
            cs.residual_mode == ResidualMode::no_residual ? CaseBranch::no_residual : CaseBranch::tie;
        return rep;
    }
    if (off_side)
        raise(ErrorKind::InternalInconsistency,
              "a dominating entry pairs an interior attention eigenvalue: " + describe(cs, direct));

    const std::vector<Complex> hv = h_values(cs);
    std::vector<Index> all_j(hv.size());
    std::iota(all_j.begin(), all_j.end(), Index{0});
    const double a1 = sides.a_first, an = sides.a_last;

    std::set<std::size_t> predicted;
    if (cs.residual_mode == ResidualMode::no_residual) {
        rep.case_branch = rep.table_branch = CaseBranch::no_residual;
        const auto js = argmax_set(hv, all_j, [&](Complex l) { return std::abs(l * an); }, tol.tie, nullptr);
        predicted = entries_for(cs, sides, js, true);
    } else {
        double r_val = 0.0;
        const auto r_set = argmax_set(hv, all_j, [](Complex l) { return std::abs(1.0 + l); }, tol.tie, &r_val);
        const Complex lambda_r = hv[static_cast<std::size_t>(*r_set.rbegin())];
        const bool nonneg = a1 >= -kZeroA1;
        std::vector<Index> left_j;
        for (Index j : all_j)
            if (!in_right_half(hv[static_cast<std::size_t>(j)]))
                left_j.push_back(j);
        if (nonneg)
            rep.table_branch = r_val >= 1.0 ? CaseBranch::A1_pos_big : CaseBranch::A1_pos_small;
        else
            rep.table_branch = in_right_half(lambda_r) ? CaseBranch::A1_neg_phase_in : CaseBranch::A1_neg_phase_out;

        // λ^A_n-side candidate (r, n); λ^A_1-side candidate maximizes |1 + λ^H λ^A_1|
        // over the table's admissible H eigenvalues.
        double n_val = 0.0, first_val = -1.0;
        const auto n_js = argmax_set(hv, all_j, [&](Complex l) { return std::abs(1.0 + l * an); }, tol.tie, &n_val);
        const std::vector<Index>& pool = nonneg ? all_j : left_j;
        std::set<Index> first_js;
        if (!pool.empty())
            first_js = argmax_set(hv, pool, [&](Complex l) { return std::abs(1.0 + l * a1); }, tol.tie, &first_val);
        const double best = std::max(n_val, first_val);
        if (best - n_val <= tol.tie * best)
            predicted.merge(entries_for(cs, sides, n_js, true));
        if (!first_js.empty() && best - first_val <= tol.tie * best)
            predicted.merge(entries_for(cs, sides, first_js, false));

        // The table's printed winners, for reporting.
        double literal = 0.0;
        auto value_at = [&](Index j, double a) { return std::abs(1.0 + hv[static_cast<std::size_t>(j)] * a); };
        const Index r = *r_set.rbegin();
        switch (rep.table_branch) {
        case CaseBranch::A1_pos_big:
            literal = value_at(r, an);
            break;
        case CaseBranch::A1_pos_small: {
            const auto mins = argmax_set(hv, all_j, [](Complex l) { return -std::abs(l); }, 0.0, nullptr);
            literal = value_at(*mins.begin(), a1);
            break;
        }
        case CaseBranch::A1_neg_phase_in:
            literal = value_at(r, an);
            if (!left_j.empty()) {
                const auto ks = argmax_set(hv, left_j, [](Complex l) { return std::abs(1.0 + l); }, 0.0, nullptr);
                literal = std::max(literal, value_at(*ks.rbegin(), a1));
            }
            break;
        default:
            literal = std::max(value_at(r, an), value_at(r, a1));
            break;
        }
        rep.literal_table_agrees = top - literal <= tol.tie * top;
        rep.case_branch = (has_first && has_last && a1 != an) ? CaseBranch::tie : rep.table_branch;
    }

    // Entries outside the admissible pool can only tie their own λ^A_n partner.
    std::set<std::size_t> missing, extra;
    std::set_difference(predicted.begin(), predicted.end(), direct.begin(), direct.end(),
                        std::inserter(missing, missing.end()));
    for (std::size_t k : direct) {
        if (predicted.count(k))
            continue;
        const auto& e = cs.entries[k];
        const bool excused = cs.residual_mode == ResidualMode::with_residual && a1 < -kZeroA1 &&
                             sides.first(e.lambda_a) && in_right_half(e.lambda_h);
        if (!excused)
            extra.insert(k);
    }
    if (predicted.empty() || !missing.empty() || !extra.empty())
        raise(ErrorKind::InternalInconsistency,
              std::string("branch ") + to_string(rep.table_branch) + " predicted " + describe(cs, predicted) +
                  " but the argmax is " + describe(cs, direct));
    return rep;
}

LimitPrediction predict_limit(const RealMatrix& x0, const EigenDecomposition& spec_h,
                              const EigenDecomposition& spec_a, const CombinedSpectrum& cs,
                              const DominanceReport& report, const Tolerances& tol) {
    const Index n = spec_a.size, d = spec_h.size;
    if (x0.rows() != n || x0.cols() != d)
        raise(ErrorKind::InvalidArgument, "X0 shape does not match the spectra");
    if (static_cast<Index>(cs.entries.size()) != n * d || report.dominating.empty())
        raise(ErrorKind::InvalidArgument, "combined spectrum does not match the spectra");
    require_finite(x0, "X0");
    const double x0_norm = x0.norm();
    if (!(x0_norm > 0.0))
        raise(ErrorKind::InvalidArgument, "X0 is zero");

    ComplexMatrix q(n * d, n * d);
    for (std::size_t k = 0; k < cs.entries.size(); ++k) {
        const auto& e = cs.entries[k];
        q.col(static_cast<Index>(k)) = kron(ComplexVector(spec_h.right_eigenvectors.col(e.j)),
                                            ComplexVector(spec_a.right_eigenvectors.col(e.i)));
    }
    const ComplexVector s = solve(q, vec(x0).cast<Complex>(), tol);

    LimitPrediction out;
    out.oscillatory = report.oscillatory;
    out.growth_log_rate = std::log(report.max_modulus);
    bool any_nonzero = false;
    for (std::size_t k : report.dominating) {
        out.coefficients.emplace_back(k, s[static_cast<Index>(k)]);
        any_nonzero = any_nonzero || std::abs(s[static_cast<Index>(k)]) >= tol.zero_coefficient * x0_norm;
    }
    if (!any_nonzero)
        raise(ErrorKind::ZeroCoefficient, "X0 has no component along the dominating eigenvectors");

    const double ref = phase(cs.entries[report.dominating.front()].mu);
    for (std::size_t k : report.dominating) {
        double diff = std::abs(phase(cs.entries[k].mu) - ref);
        diff = std::min(diff, 2.0 * std::numbers::pi - diff);
        if (diff > tol.phase)
            return out;
    }
    ComplexMatrix sum = ComplexMatrix::Zero(n, d);
    for (const auto& [k, coeff] : out.coefficients) {
        const auto& e = cs.entries[k];
        sum += coeff * spec_a.right_eigenvectors.col(e.i) * spec_h.right_eigenvectors.col(e.j).transpose();
    }
    const double total = sum.norm();
    if (!(total > 0.0))
        raise(ErrorKind::ZeroCoefficient, "dominating terms cancel");
    if (sum.imag().norm() > tol.imag_residue * total)
        return out;
    const RealMatrix re = sum.real();
    out.limit_direction = re / re.norm();
    out.direction_available = true;
    out.rank_of_limit = numerical_rank(singular_values(out.limit_direction), tol.rank_cutoff);
    return out;
}

Index geometric_multiplicity(const EigenDecomposition& spec, Complex lambda, double tol, double rank_cutoff) {
    std::vector<Index> cols;
    for (Index k = 0; k < spec.size; ++k)
        if (std::abs(spec.eigenvalues[k] - lambda) <= tol)
            cols.push_back(k);
    if (cols.empty())
        return 0;
    ComplexMatrix block(spec.size, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        block.col(static_cast<Index>(c)) = spec.right_eigenvectors.col(cols[c]);
    return numerical_rank(Eigen::JacobiSVD<ComplexMatrix>(block).singularValues(), rank_cutoff);
}

SmoothingVerdict smoothing_verdict(const DominanceReport& report, const CombinedSpectrum& cs,
                                   const EigenDecomposition& spec_a, const EigenDecomposition& spec_h,
                                   const Tolerances& tol) {
    SmoothingVerdict v;
    auto set = [&v](Theorem3Case c, bool in, bool angle, bool rank, const char* clause) {
        v.theorem3_case = c;
        v.input_convergence = in;
        v.angle_convergence = angle;
        v.rank_collapse = rank;
        v.clause = clause;
    };
    if (cs.residual_mode == ResidualMode::no_residual) {
        set(Theorem3Case::case1, true, true, true, "no_residual");
        return v;
    }
    if (report.dominating.size() == cs.entries.size() && cs.entries.size() > 1) {
        set(Theorem3Case::indeterminate, false, false, false, "all_tied");
        return v;
    }
    if (report.dominant_type == DominantType::type1_smoothing) {
        set(Theorem3Case::case1, true, true, true, report.dominating.size() == 1 ? "1" : "1_multiple_type1");
        return v;
    }
    if (report.dominating.size() == 1) {
        set(Theorem3Case::case2, false, false, true, "2");
        return v;
    }
    const Sides sides = attention_sides(cs);
    auto close = [&](Complex z) { return tol.multiplicity * std::max(1.0, std::abs(z)); };
    const bool gm_a = geometric_multiplicity(spec_a, sides.a_first, close(sides.a_first), tol.rank_cutoff) > 1;
    bool gm_h = false;
    for (std::size_t k : report.dominating) {
        const Complex lh = cs.entries[k].lambda_h;
        gm_h = gm_h || geometric_multiplicity(spec_h, lh, close(lh), tol.rank_cutoff) > 1;
    }
    if (gm_a && gm_h)
        set(Theorem3Case::case3ab, false, false, false, "3a+3b");
    else
        set(Theorem3Case::case3a, false, false, true, "3a");
    return v;
}

ClipRange clip_range_classification(const std::vector<Complex>& eigenvalues_h) {
    if (eigenvalues_h.empty())
        return ClipRange::unclassified;
    auto real = [](Complex z) { return std::abs(z.imag()) <= 1e-12; };
    const bool sharp = std::all_of(eigenvalues_h.begin(), eigenvalues_h.end(), [&](Complex z) {
        return real(z) && z.real() >= -1.0 && z.real() < 0.0;
    });
    if (sharp)
        return ClipRange::sharpening;
    const bool smooth =
        std::all_of(eigenvalues_h.begin(), eigenvalues_h.end(), [&](Complex z) { return real(z) && z.real() > 0.0; });
    return smooth ? ClipRange::smoothing : ClipRange::unclassified;
}

} // namespace smoothlab

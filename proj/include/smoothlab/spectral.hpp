#pragma once

#include "smoothlab/attention.hpp"
#include "smoothlab/linalg.hpp"

#include <string>
#include <utility>
#include <vector>

namespace smoothlab {

enum class ResidualMode { with_residual, no_residual };

struct SpectrumEntry {
    Index i = 0;             ///< index into the attention spectrum
    Index j = 0;             ///< index into the H spectrum
    double lambda_a = 0.0;
    Complex lambda_h;
    Complex mu;
};

// Eigenvalues of (I + H⊗A) (or H⊗A), sorted by |μ| descending.
struct CombinedSpectrum {
    std::vector<SpectrumEntry> entries;
    ResidualMode residual_mode = ResidualMode::with_residual;
};

enum class CaseBranch { A1_pos_big, A1_pos_small, A1_neg_phase_in, A1_neg_phase_out, tie, no_residual };
enum class DominantType { type1_smoothing, type2_sharpening, mixed };

struct DominanceReport {
    std::vector<std::size_t> dominating;   ///< indices into CombinedSpectrum::entries
    CaseBranch case_branch = CaseBranch::tie;
    CaseBranch table_branch = CaseBranch::tie;   ///< branch from the λ^A_1 / φ^H conditions alone
    DominantType dominant_type = DominantType::type1_smoothing;
    double max_modulus = 0.0;
    double gap_ratio = 1.0;
    bool oscillatory = false;
    double tie_tolerance_used = 0.0;
    bool literal_table_agrees = true;      ///< the case table's printed winners match the argmax
};

struct LimitPrediction {
    RealMatrix limit_direction;
    bool direction_available = false;
    double growth_log_rate = 0.0;
    std::vector<std::pair<std::size_t, Complex>> coefficients;
    bool oscillatory = false;
    Index rank_of_limit = 0;
};

enum class Theorem3Case { case1, case2, case3a, case3ab, indeterminate };

struct SmoothingVerdict {
    bool input_convergence = false;
    bool angle_convergence = false;
    bool rank_collapse = false;
    Theorem3Case theorem3_case = Theorem3Case::indeterminate;
    std::string clause;
};

enum class ClipRange { sharpening, smoothing, unclassified };

const char* to_string(CaseBranch b) noexcept;
const char* to_string(DominantType t) noexcept;
const char* to_string(Theorem3Case c) noexcept;
const char* to_string(ClipRange c) noexcept;
const char* to_string(ResidualMode m) noexcept;

// Eigendecomposition of H ordered by ascending |1 + λ| (ties: real, then imaginary part).
EigenDecomposition h_spectrum(const RealMatrix& h, const Tolerances& tol = {});

// Phase in (−π, π], +π for negative reals.
double phase(Complex z);

CombinedSpectrum combined_spectrum(const EigenDecomposition& spec_h, const EigenDecomposition& spec_a,
                                   ResidualMode mode);

DominanceReport classify_dominance(const CombinedSpectrum& cs, const Tolerances& tol = {});

LimitPrediction predict_limit(const RealMatrix& x0, const EigenDecomposition& spec_h,
                              const EigenDecomposition& spec_a, const CombinedSpectrum& cs,
                              const DominanceReport& report, const Tolerances& tol = {});

Index geometric_multiplicity(const EigenDecomposition& spec, Complex lambda, double tol,
                             double rank_cutoff = 1e-8);

SmoothingVerdict smoothing_verdict(const DominanceReport& report, const CombinedSpectrum& cs,
                                   const EigenDecomposition& spec_a, const EigenDecomposition& spec_h,
                                   const Tolerances& tol = {});

ClipRange clip_range_classification(const std::vector<Complex>& eigenvalues_h);

} // namespace smoothlab

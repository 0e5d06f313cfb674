#pragma once

namespace smoothlab {

// Thresholds shared by every module. Defaults follow the documented contract;
// `scaled` multiplies the tolerance-type fields, leaving structural limits
// (condition threshold, size cap) untouched.
struct Tolerances {
    double eig_residual = 1e-10;       ///< relative to ‖M‖_F
    double svd_residual = 1e-10;       ///< relative to ‖M‖_F
    double solve_pivot = 1e-13;        ///< relative to ‖M‖_F
    double solve_residual = 1e-10;     ///< relative to ‖M‖_F·‖x‖
    double realness = 1e-9;            ///< max |Im λ| accepted for attention spectra
    double row_sum = 1e-12;
    double perron_value = 1e-9;
    double perron_vector = 1e-8;
    double tie = 1e-9;                 ///< relative |μ| tie tolerance
    double oscillation = 1e-12;        ///< |Im μ| / |μ| above which μ is non-real
    double phase = 1e-12;              ///< argument agreement for summing dominating terms
    double imag_residue = 1e-10;       ///< relative imaginary part discarded from limits
    double zero_coefficient = 1e-13;   ///< relative to ‖vec X0‖
    double rank_cutoff = 1e-8;         ///< relative to σ_max
    double multiplicity = 1e-8;        ///< eigenvalue closeness for geometric multiplicity

    double diagonalizable_condition = 1e12;
    int max_eigen_size = 64;

    Tolerances scaled(double factor) const;
};

// Library defaults scaled by SMOOTHLAB_TOL_SCALE when set.
Tolerances tolerances_from_environment();

} // namespace smoothlab

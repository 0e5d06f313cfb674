#pragma once

#include "smoothlab/linalg.hpp"

namespace smoothlab {

struct SmoothingMetrics {
    double hfc_lfc = 0.0;          ///< +inf when the low-frequency part vanishes
    double mean_cosine = 0.0;
    double effective_rank = 1.0;
};

// ‖(I − 11ᵀ/n)X‖_F / ‖(11ᵀ/n)X‖_F.
double hfc_lfc_ratio(const RealMatrix& x);

struct DftProjectors {
    RealMatrix lfc;
    RealMatrix hfc;
};

// Real parts of F⁻¹ diag(1,0,…,0) F and F⁻¹ diag(0,1,…,1) F with the unitary-up-to-1/n DFT.
DftProjectors build_dft_projectors(Index n);
double hfc_lfc_ratio(const RealMatrix& x, const DftProjectors& projectors);

double mean_cosine_similarity(const RealMatrix& x);
double effective_rank(const RealMatrix& x);
double effective_rank_from_sigma(const RealVector& sigma);

SmoothingMetrics metrics_of(const RealMatrix& x);

} // namespace smoothlab

#pragma once

#include "smoothlab/linalg.hpp"

namespace smoothlab {

struct QueryKeyWeights {
    RealMatrix w_q;   ///< d × k
    RealMatrix w_k;   ///< d × k
    int scale_dim = 1;
};

// Validated positive right-stochastic matrix. The spectrum is real and sorted
// ascending, so the Perron eigenvalue sits last (perron_index = n − 1).
struct AttentionMatrix {
    RealMatrix a;
    EigenDecomposition spectrum;
    Index perron_index = 0;

    Index n() const { return a.rows(); }
    double lambda(Index i) const { return spectrum.eigenvalues[i].real(); }
};

RealMatrix rowwise_softmax(const RealMatrix& logits);

AttentionMatrix softmax_attention(const RealMatrix& x, const QueryKeyWeights& w, const Tolerances& tol = {});
AttentionMatrix attention_from_logits(const RealMatrix& logits, const Tolerances& tol = {});
AttentionMatrix attention_from_matrix(const RealMatrix& a, const Tolerances& tol = {});

double perron_gap(const AttentionMatrix& a);

// Stochastic-matrix facts that hold whether or not the spectrum is real.
struct PerronCheck {
    double max_row_sum_error = 0.0;
    Index eigenvalues_near_one = 0;
    double perron_vector_error = 0.0;   ///< ‖v − 1/√n‖ for the canonical Perron eigenvector
    double max_modulus = 0.0;
    double max_imag = 0.0;
};

PerronCheck perron_check(const RealMatrix& a, const Tolerances& tol = {});

} // namespace smoothlab

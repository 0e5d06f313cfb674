#include "smoothlab/attention.hpp"

#include "smoothlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smoothlab {

namespace {

// Replaces each near-real conjugate pair (already within the realness
// tolerance) by a real orthonormal basis of the same invariant plane.
void project_to_real(EigenDecomposition& spec) {
    for (Index k = 0; k < spec.size; ++k) {
        if (spec.eigenvalues[k].imag() == 0.0)
            continue;
        const Index partner = k + 1;
        if (partner < spec.size && spec.eigenvalues[partner] == std::conj(spec.eigenvalues[k])) {
            const ComplexVector v = spec.right_eigenvectors.col(k);
            RealVector q1 = v.real();
            RealVector q2 = v.imag();
            q1.normalize();
            q2 -= q1.dot(q2) * q1;
            const double n2 = q2.norm();
            if (n2 > 0.0)
                q2 /= n2;
            else
                q2 = q1;
            spec.right_eigenvectors.col(k) = canonicalize(q1.cast<Complex>());
            spec.right_eigenvectors.col(partner) = canonicalize(q2.cast<Complex>());
            spec.eigenvalues[k] = spec.eigenvalues[k].real();
            spec.eigenvalues[partner] = spec.eigenvalues[partner].real();
            ++k;
        } else {
            spec.eigenvalues[k] = spec.eigenvalues[k].real();
        }
    }
}

double row_sum_error(const RealMatrix& a) {
    return (a.rowwise().sum().array() - 1.0).abs().maxCoeff();
}

} // namespace

RealMatrix rowwise_softmax(const RealMatrix& logits) {
    RealMatrix out(logits.rows(), logits.cols());
    for (Index i = 0; i < logits.rows(); ++i) {
        const double top = logits.row(i).maxCoeff();
        out.row(i) = (logits.row(i).array() - top).exp();
        out.row(i) /= out.row(i).sum();
    }
    return out;
}

AttentionMatrix attention_from_matrix(const RealMatrix& a, const Tolerances& tol) {
    if (a.rows() != a.cols() || a.rows() == 0)
        raise(ErrorKind::InvalidArgument, "attention matrix must be square and non-empty");
    require_finite(a, "attention matrix");
    if ((a.array() < 0.0).any())
        raise(ErrorKind::InvalidArgument, "attention matrix has a negative entry");
    if ((a.array() == 0.0).any())
        raise(ErrorKind::Underflow, "attention entry is exactly zero; A is not positive");
    const double row_err = row_sum_error(a);
    if (!(row_err <= tol.row_sum))
        raise(ErrorKind::InvalidArgument, "attention rows do not sum to 1 (max error " +
                                              std::to_string(row_err) + ")");

    AttentionMatrix out;
    out.a = a;
    out.spectrum = eig_general(a, tol);
    const double max_imag = out.spectrum.eigenvalues.imag().cwiseAbs().maxCoeff();
    if (max_imag > tol.realness)
        raise(ErrorKind::ComplexSpectrum, "attention spectrum has |Im λ| = " + std::to_string(max_imag));
    if (max_imag > 0.0) {
        project_to_real(out.spectrum);
        const ComplexMatrix ac = a.cast<Complex>();
        double worst = 0.0;
        for (Index k = 0; k < out.spectrum.size; ++k) {
            const ComplexVector v = out.spectrum.right_eigenvectors.col(k);
            worst = std::max(worst, (ac * v - out.spectrum.eigenvalues[k] * v).norm() / a.norm());
        }
        out.spectrum.max_residual = worst;
        out.spectrum.eigvec_condition = condition_number(out.spectrum.right_eigenvectors);
    }

    const Index n = a.rows();
    Index near_one = 0;
    for (Index k = 0; k < n; ++k)
        if (std::abs(out.spectrum.eigenvalues[k] - 1.0) <= tol.perron_value)
            ++near_one;
    if (near_one != 1)
        raise(ErrorKind::PerronViolation, std::to_string(near_one) + " eigenvalues within tolerance of 1");
    out.perron_index = n - 1;
    if (std::abs(out.spectrum.eigenvalues[n - 1] - 1.0) > tol.perron_value)
        raise(ErrorKind::PerronViolation, "eigenvalue 1 is not the largest eigenvalue");
    for (Index k = 0; k + 1 < n; ++k)
        if (!(std::abs(out.spectrum.eigenvalues[k]) < 1.0))
            raise(ErrorKind::PerronViolation, "non-Perron eigenvalue with modulus ≥ 1");
    const ComplexVector ones = ComplexVector::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0));
    const double vec_err = (out.spectrum.right_eigenvectors.col(n - 1) - ones).norm();
    if (!(vec_err <= tol.perron_vector))
        raise(ErrorKind::PerronViolation, "Perron eigenvector deviates from the ones vector by " +
                                              std::to_string(vec_err));
    if (!(out.spectrum.eigvec_condition < tol.diagonalizable_condition))
        raise(ErrorKind::NotDiagonalizable, "eigenvector condition " +
                                                std::to_string(out.spectrum.eigvec_condition));
    return out;
}

AttentionMatrix attention_from_logits(const RealMatrix& logits, const Tolerances& tol) {
    if (logits.rows() != logits.cols())
        raise(ErrorKind::InvalidArgument, "logits must be square");
    require_finite(logits, "logits");
    return attention_from_matrix(rowwise_softmax(logits), tol);
}

AttentionMatrix softmax_attention(const RealMatrix& x, const QueryKeyWeights& w, const Tolerances& tol) {
    if (w.scale_dim <= 0)
        raise(ErrorKind::InvalidArgument, "scale_dim must be positive");
    if (w.w_q.rows() != x.cols() || w.w_k.rows() != x.cols() || w.w_q.cols() != w.w_k.cols())
        raise(ErrorKind::InvalidArgument, "query/key weight shapes do not match the token matrix");
    require_finite(x, "token matrix");
    require_finite(w.w_q, "W_Q");
    require_finite(w.w_k, "W_K");
    const RealMatrix logits = (x * w.w_q) * (x * w.w_k).transpose() / std::sqrt(double(w.scale_dim));
    return attention_from_logits(logits, tol);
}

double perron_gap(const AttentionMatrix& a) {
    double worst = 0.0;
    for (Index k = 0; k < a.n(); ++k)
        if (k != a.perron_index)
            worst = std::max(worst, std::abs(a.spectrum.eigenvalues[k]));
    return 1.0 - worst;
}

PerronCheck perron_check(const RealMatrix& a, const Tolerances& tol) {
    PerronCheck out;
    out.max_row_sum_error = row_sum_error(a);
    const EigenDecomposition spec = eig_general(a, tol);
    const Index n = a.rows();
    Index closest = 0;
    for (Index k = 0; k < n; ++k) {
        const Complex lam = spec.eigenvalues[k];
        if (std::abs(lam - 1.0) <= tol.perron_value)
            ++out.eigenvalues_near_one;
        if (std::abs(lam - 1.0) < std::abs(spec.eigenvalues[closest] - 1.0))
            closest = k;
        out.max_modulus = std::max(out.max_modulus, std::abs(lam));
        out.max_imag = std::max(out.max_imag, std::abs(lam.imag()));
    }
    const ComplexVector ones = ComplexVector::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0));
    out.perron_vector_error = (spec.right_eigenvectors.col(closest) - ones).norm();
    return out;
}

} // namespace smoothlab

#pragma once

#include "smoothlab/tolerances.hpp"

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace smoothlab {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

void require_finite(const RealMatrix& m, const char* what);

// Column stacking: column j occupies positions j·rows .. (j+1)·rows - 1.
RealVector vec(const RealMatrix& m);
RealMatrix unvec(const RealVector& v, Index rows, Index cols);

// (i,j) block is a_ij·B, so vec(B X Aᵀ) = kron(A, B)·vec(X).
RealMatrix kron(const RealMatrix& a, const RealMatrix& b);
ComplexVector kron(const ComplexVector& a, const ComplexVector& b);

struct EigenDecomposition {
    Index size = 0;
    ComplexVector eigenvalues;          ///< ascending by real part, then imaginary part
    ComplexMatrix right_eigenvectors;   ///< column k pairs with eigenvalues[k]
    double max_residual = 0.0;          ///< max_k ‖M v_k − λ_k v_k‖ / ‖M‖_F
    double eigvec_condition = 1.0;      ///< κ₂ of right_eigenvectors
};

EigenDecomposition eig_general(const RealMatrix& m, const Tolerances& tol = {});

// Eigenvalues only, same ordering; for large brute-force oracles.
ComplexVector eigenvalues_general(const RealMatrix& m, const Tolerances& tol = {});

struct SingularValueDecomposition {
    RealMatrix u;       ///< rows × r
    RealVector sigma;   ///< descending, r = min(rows, cols)
    RealMatrix v;       ///< cols × r
};

SingularValueDecomposition svd(const RealMatrix& m, const Tolerances& tol = {});
RealVector singular_values(const RealMatrix& m);
Index numerical_rank(const RealVector& sigma, double relative_cutoff);

double condition_number(const ComplexMatrix& m);

ComplexVector solve(const ComplexMatrix& m, const ComplexVector& b, const Tolerances& tol = {});
RealMatrix inverse(const RealMatrix& m, const Tolerances& tol = {});

// Unit norm, first component above 1e-12 rotated to the positive real axis.
ComplexVector canonicalize(const ComplexVector& v);

// Optimal one-to-one pairing minimizing the summed distance; returns the
// largest distance among matched pairs.
double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b);

} // namespace smoothlab

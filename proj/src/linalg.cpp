#include "smoothlab/linalg.hpp"

#include "smoothlab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace smoothlab {

namespace {

void require_square(const RealMatrix& m, const char* what) {
    if (m.rows() != m.cols())
        raise(ErrorKind::InvalidArgument, std::string(what) + " must be square, got " +
                                              std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

std::vector<Index> ascending_order(const ComplexVector& values) {
    std::vector<Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        if (values[a].real() != values[b].real())
            return values[a].real() < values[b].real();
        return values[a].imag() < values[b].imag();
    });
    return order;
}

Eigen::EigenSolver<RealMatrix> run_schur(const RealMatrix& m, const Tolerances& tol, bool vectors) {
    require_square(m, "eigen input");
    require_finite(m, "eigen input");
    if (m.rows() > tol.max_eigen_size)
        raise(ErrorKind::InvalidArgument, "eigen input exceeds the configured size cap of " +
                                              std::to_string(tol.max_eigen_size));
    Eigen::EigenSolver<RealMatrix> solver;
    solver.setMaxIterations(100 * std::max<Index>(m.rows(), 1));
    solver.compute(m, vectors);
    if (solver.info() != Eigen::Success)
        raise(ErrorKind::NonConvergence, "QR iteration exceeded 100·m sweeps for a " +
                                             std::to_string(m.rows()) + "x" + std::to_string(m.rows()) +
                                             " matrix");
    return solver;
}

} // namespace

void require_finite(const RealMatrix& m, const char* what) {
    if (!m.allFinite())
        raise(ErrorKind::InvalidArgument, std::string(what) + " contains a non-finite entry");
}

RealVector vec(const RealMatrix& m) {
    return Eigen::Map<const RealVector>(m.data(), m.size());
}

RealMatrix unvec(const RealVector& v, Index rows, Index cols) {
    if (rows * cols != v.size())
        raise(ErrorKind::InvalidArgument, "unvec shape does not match vector length");
    return Eigen::Map<const RealMatrix>(v.data(), rows, cols);
}

RealMatrix kron(const RealMatrix& a, const RealMatrix& b) {
    RealMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexVector kron(const ComplexVector& a, const ComplexVector& b) {
    ComplexVector out(a.size() * b.size());
    for (Index i = 0; i < a.size(); ++i)
        out.segment(i * b.size(), b.size()) = a[i] * b;
    return out;
}

ComplexVector canonicalize(const ComplexVector& v) {
    const double norm = v.norm();
    if (norm == 0.0)
        return v;
    ComplexVector out = v / norm;
    for (Index i = 0; i < out.size(); ++i) {
        const double mag = std::abs(out[i]);
        if (mag > 1e-12) {
            out *= std::conj(out[i]) / mag;
            out[i] = Complex(out[i].real(), 0.0);
            break;
        }
    }
    return out;
}

EigenDecomposition eig_general(const RealMatrix& m, const Tolerances& tol) {
    const auto solver = run_schur(m, tol, true);
    const ComplexVector raw_values = solver.eigenvalues();
    const ComplexMatrix raw_vectors = solver.eigenvectors();
    const auto order = ascending_order(raw_values);

    EigenDecomposition out;
    out.size = m.rows();
    out.eigenvalues.resize(out.size);
    out.right_eigenvectors.resize(out.size, out.size);
    for (Index k = 0; k < out.size; ++k) {
        out.eigenvalues[k] = raw_values[order[static_cast<std::size_t>(k)]];
        out.right_eigenvectors.col(k) = canonicalize(raw_vectors.col(order[static_cast<std::size_t>(k)]));
    }

    const double scale = m.norm();
    const ComplexMatrix mc = m.cast<Complex>();
    double worst = 0.0;
    for (Index k = 0; k < out.size; ++k) {
        const ComplexVector v = out.right_eigenvectors.col(k);
        const double r = (mc * v - out.eigenvalues[k] * v).norm();
        worst = std::max(worst, scale > 0.0 ? r / scale : r);
    }
    out.max_residual = worst;
    if (!(worst <= tol.eig_residual))
        raise(ErrorKind::NonConvergence, "eigenpair residual " + std::to_string(worst) +
                                             " exceeds tolerance");
    out.eigvec_condition = out.size == 0 ? 1.0 : condition_number(out.right_eigenvectors);
    return out;
}

ComplexVector eigenvalues_general(const RealMatrix& m, const Tolerances& tol) {
    const auto solver = run_schur(m, tol, false);
    const ComplexVector raw = solver.eigenvalues();
    const auto order = ascending_order(raw);
    ComplexVector out(raw.size());
    for (Index k = 0; k < raw.size(); ++k)
        out[k] = raw[order[static_cast<std::size_t>(k)]];
    return out;
}

SingularValueDecomposition svd(const RealMatrix& m, const Tolerances& tol) {
    require_finite(m, "svd input");
    SingularValueDecomposition out;
    const Index r = std::min(m.rows(), m.cols());
    if (r == 0) {
        out.u.resize(m.rows(), 0);
        out.v.resize(m.cols(), 0);
        return out;
    }
    Eigen::JacobiSVD<RealMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.u = solver.matrixU();
    out.sigma = solver.singularValues();
    out.v = solver.matrixV();
    const double scale = m.norm();
    const double err = (m - out.u * out.sigma.asDiagonal() * out.v.transpose()).norm();
    if (scale > 0.0 && !(err <= tol.svd_residual * scale))
        raise(ErrorKind::NonConvergence, "svd reconstruction residual above tolerance");
    return out;
}

RealVector singular_values(const RealMatrix& m) {
    require_finite(m, "svd input");
    if (m.size() == 0)
        return RealVector{};
    return Eigen::JacobiSVD<RealMatrix>(m).singularValues();
}

Index numerical_rank(const RealVector& sigma, double relative_cutoff) {
    if (sigma.size() == 0 || sigma[0] <= 0.0)
        return 0;
    const double cut = relative_cutoff * sigma[0];
    return static_cast<Index>(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cut; }));
}

double condition_number(const ComplexMatrix& m) {
    if (m.size() == 0)
        return 1.0;
    const RealVector s = Eigen::JacobiSVD<ComplexMatrix>(m).singularValues();
    const double lo = s[s.size() - 1];
    if (!(lo > 0.0))
        return std::numeric_limits<double>::infinity();
    return s[0] / lo;
}

ComplexVector solve(const ComplexMatrix& m, const ComplexVector& b, const Tolerances& tol) {
    if (m.rows() != m.cols() || m.rows() != b.size())
        raise(ErrorKind::InvalidArgument, "solve: shape mismatch");
    if (m.size() == 0)
        return ComplexVector{};
    const double scale = m.norm();
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot >= tol.solve_pivot * scale))
        raise(ErrorKind::Singular, "pivot magnitude " + std::to_string(pivot) + " below threshold");
    ComplexVector x = lu.solve(b);
    const double res = (m * x - b).norm();
    if (!(res <= tol.solve_residual * scale * x.norm() + std::numeric_limits<double>::min()))
        raise(ErrorKind::Singular, "solve residual above tolerance; matrix numerically rank-deficient");
    return x;
}

RealMatrix inverse(const RealMatrix& m, const Tolerances& tol) {
    require_square(m, "inverse input");
    require_finite(m, "inverse input");
    if (m.size() == 0)
        return m;
    Eigen::PartialPivLU<RealMatrix> lu(m);
    const double pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    if (!(pivot >= tol.solve_pivot * m.norm()))
        raise(ErrorKind::Singular, "pivot magnitude " + std::to_string(pivot) + " below threshold");
    return lu.inverse();
}

double multiset_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    if (a.size() != b.size())
        raise(ErrorKind::InvalidArgument, "multiset sizes differ");
    const std::size_t n = a.size();
    if (n == 0)
        return 0.0;
    // Hungarian algorithm with potentials, 1-based rows/columns.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    auto cost = [&](std::size_t i, std::size_t j) { return std::abs(a[i - 1] - b[j - 1]); };
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j])
                    continue;
                const double cur = cost(i0, j) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    double worst = 0.0;
    for (std::size_t j = 1; j <= n; ++j)
        worst = std::max(worst, cost(p[j], j));
    return worst;
}

} // namespace smoothlab

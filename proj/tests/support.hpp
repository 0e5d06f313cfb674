#pragma once

#include "smoothlab/errors.hpp"
#include "smoothlab/linalg.hpp"
#include "smoothlab/sampling.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

namespace smoothlab::test {

inline RealMatrix gaussian(Index rows, Index cols, std::uint64_t seed, double stddev = 1.0) {
    Rng rng(seed);
    return normal_matrix(rows, cols, stddev, rng);
}

inline std::vector<Complex> as_list(const ComplexVector& v) { return {v.begin(), v.end()}; }

inline std::vector<double> sorted_real(const ComplexVector& v) {
    std::vector<double> out;
    for (const auto& z : v)
        out.push_back(z.real());
    std::sort(out.begin(), out.end());
    return out;
}

// Symmetric positive row-stochastic 2×2 with eigenvalues {1, 2p − 1}.
inline RealMatrix two_state(double p) {
    RealMatrix a(2, 2);
    a << p, 1.0 - p, 1.0 - p, p;
    return a;
}

template <class F>
ErrorKind kind_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

} // namespace smoothlab::test

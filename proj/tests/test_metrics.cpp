#include "support.hpp"

#include "smoothlab/metrics.hpp"

#include <cmath>
#include <limits>

using namespace smoothlab;
using smoothlab::test::gaussian;

namespace {

RealMatrix column(std::initializer_list<double> v) {
    RealMatrix m(static_cast<Index>(v.size()), 1);
    Index i = 0;
    for (double x : v)
        m(i++, 0) = x;
    return m;
}

} // namespace

TEST_SUITE("hfc_lfc") {
    TEST_CASE("closed-form examples") {
        CHECK(hfc_lfc_ratio(column({1, 1})) == 0.0);
        CHECK(hfc_lfc_ratio(column({1, -1})) == std::numeric_limits<double>::infinity());
        CHECK(std::abs(hfc_lfc_ratio(column({2, 0})) - 1.0) <= 1e-12);
        CHECK(test::kind_of([] { hfc_lfc_ratio(RealMatrix::Zero(3, 2)); }) == ErrorKind::Degenerate);
    }

    TEST_CASE("DFT projector route") {
        const auto p1 = build_dft_projectors(1);
        CHECK(p1.lfc(0, 0) == doctest::Approx(1.0));
        CHECK(std::abs(p1.hfc(0, 0)) <= 1e-15);

        const auto p4 = build_dft_projectors(4);
        CHECK((p4.lfc - RealMatrix::Constant(4, 4, 0.25)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((p4.hfc - (RealMatrix::Identity(4, 4) - p4.lfc)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((p4.lfc * p4.lfc - p4.lfc).norm() <= 1e-12);
        CHECK((p4.hfc * p4.hfc - p4.hfc).norm() <= 1e-12);

        CHECK(std::abs(hfc_lfc_ratio(column({2, 0}), build_dft_projectors(2)) - 1.0) <= 1e-12);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            const RealMatrix x = gaussian(7, 3, seed);
            CHECK(std::abs(hfc_lfc_ratio(x) - hfc_lfc_ratio(x, build_dft_projectors(7))) <= 1e-10);
        }
    }
}

TEST_SUITE("mean cosine") {
    TEST_CASE("examples") {
        RealMatrix same(2, 3);
        same << 1, 2, 3, 1, 2, 3;
        CHECK(mean_cosine_similarity(same) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(mean_cosine_similarity(RealMatrix::Identity(2, 2)) == 0.0);
        RealMatrix x(2, 2);
        x << 1, 0, 1, 1;
        CHECK(std::abs(mean_cosine_similarity(x) - 0.7071067811865476) <= 1e-12);
    }

    TEST_CASE("zero rows are skipped") {
        RealMatrix x(3, 2);
        x << 1, 0, 0, 0, 1, 1;
        CHECK(std::abs(mean_cosine_similarity(x) - 0.7071067811865476) <= 1e-12);
        RealMatrix dead = RealMatrix::Zero(3, 2);
        dead(0, 0) = 1.0;
        CHECK(test::kind_of([&] { mean_cosine_similarity(dead); }) == ErrorKind::Degenerate);
        CHECK(test::kind_of([] { mean_cosine_similarity(RealMatrix::Ones(1, 3)); }) == ErrorKind::NotApplicable);
    }
}

TEST_SUITE("effective rank") {
    TEST_CASE("examples") {
        CHECK(effective_rank(RealMatrix::Identity(2, 2)) == doctest::Approx(2.0).epsilon(1e-14));
        RealVector u(4), v(3);
        u << 1, -2, 0.5, 3;
        v << 2, 1, -1;
        CHECK(effective_rank(u * v.transpose()) == doctest::Approx(1.0).epsilon(1e-12));
        RealMatrix d(2, 2);
        d << 3, 0, 0, 1;
        // exp(−(¾ ln ¾ + ¼ ln ¼)), evaluated in 30-digit arithmetic.
        CHECK(std::abs(effective_rank(d) - 1.7547653506033232) <= 1e-12);
        CHECK(test::kind_of([] { effective_rank(RealMatrix::Zero(2, 2)); }) == ErrorKind::Degenerate);
    }

    TEST_CASE("bounded by the construction rank") {
        for (Index k = 1; k <= 4; ++k) {
            const RealMatrix x = gaussian(6, k, 40 + k) * gaussian(k, 5, 50 + k);
            const double er = effective_rank(x);
            CHECK(er >= 1.0);
            CHECK(er <= double(numerical_rank(singular_values(x), 1e-10)) + 1e-12);
            CHECK(numerical_rank(singular_values(x), 1e-10) == k);
        }
    }
}

TEST_SUITE("metrics_of") {
    TEST_CASE("scale invariance") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const RealMatrix x = gaussian(5, 4, 100 + seed);
            const auto base = metrics_of(x);
            for (double c : {1e-6, 1.0, 1e6}) {
                const auto m = metrics_of(c * x);
                CHECK(std::abs(m.hfc_lfc - base.hfc_lfc) <= 1e-10 * std::max(1.0, base.hfc_lfc));
                CHECK(std::abs(m.mean_cosine - base.mean_cosine) <= 1e-10);
                CHECK(std::abs(m.effective_rank - base.effective_rank) <= 1e-10);
                const auto neg = metrics_of(-c * x);
                CHECK(std::abs(neg.hfc_lfc - base.hfc_lfc) <= 1e-10 * std::max(1.0, base.hfc_lfc));
                CHECK(std::abs(neg.mean_cosine - base.mean_cosine) <= 1e-10);
                CHECK(std::abs(neg.effective_rank - base.effective_rank) <= 1e-10);
            }
        }
    }

    TEST_CASE("identical rows are the oversmoothed fixed point") {
        RealVector xbar(3);
        xbar << 0.3, -1.0, 2.0;
        const auto m = metrics_of(RealVector::Ones(4) * xbar.transpose());
        CHECK(m.hfc_lfc == 0.0);
        CHECK(m.mean_cosine == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(m.effective_rank == doctest::Approx(1.0).epsilon(1e-12));
    }

    TEST_CASE("mixed-sign rank-one matrix collapses rank but not angles") {
        RealVector v(3), a(2);
        v << 1.0, -0.5, 2.0;
        a << 1.0, 1.0;
        const auto m = metrics_of(v * a.transpose());
        CHECK(m.effective_rank == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.mean_cosine < 1.0 - 1e-3);
        CHECK(m.hfc_lfc > 0.0);
    }
}

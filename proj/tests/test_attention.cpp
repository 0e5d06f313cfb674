#include "support.hpp"

#include "smoothlab/attention.hpp"

#include <cmath>

using namespace smoothlab;
using smoothlab::test::gaussian;

TEST_CASE("zero logits give uniform attention") {
    const auto a = attention_from_logits(RealMatrix::Zero(3, 3));
    CHECK((a.a - RealMatrix::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(perron_gap(a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(a.perron_index == 2);
}

TEST_CASE("zero token matrix gives uniform attention") {
    QueryKeyWeights w{gaussian(4, 2, 1), gaussian(4, 2, 2), 2};
    const auto a = softmax_attention(RealMatrix::Zero(5, 4), w);
    CHECK((a.a - RealMatrix::Constant(5, 5, 0.2)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("logits ln9·I on two tokens") {
    const auto a = attention_from_logits(std::log(9.0) * RealMatrix::Identity(2, 2));
    CHECK((a.a - test::two_state(0.9)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(a.lambda(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(a.lambda(1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(perron_gap(a) == doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("a huge logit underflows its neighbours") {
    RealMatrix logits = RealMatrix::Zero(2, 2);
    logits(0, 0) = 1000.0;
    CHECK(test::kind_of([&] { attention_from_logits(logits); }) == ErrorKind::Underflow);
}

TEST_CASE("rowwise shift invariance") {
    const RealMatrix logits = gaussian(4, 4, 3);
    RealVector shift(4);
    shift << 3.0, -7.5, 0.25, 40.0;
    const RealMatrix shifted = logits + shift * RealVector::Ones(4).transpose();
    CHECK((rowwise_softmax(logits) - rowwise_softmax(shifted)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("validation of explicit matrices") {
    RealMatrix not_stochastic = test::two_state(0.9);
    not_stochastic(0, 0) = 0.95;
    CHECK(test::kind_of([&] { attention_from_matrix(not_stochastic); }) == ErrorKind::InvalidArgument);
    RealMatrix negative(2, 2);
    negative << 1.1, -0.1, 0.5, 0.5;
    CHECK(test::kind_of([&] { attention_from_matrix(negative); }) == ErrorKind::InvalidArgument);
    RealMatrix zero(2, 2);
    zero << 1.0, 0.0, 0.5, 0.5;
    CHECK(test::kind_of([&] { attention_from_matrix(zero); }) == ErrorKind::Underflow);
}

TEST_CASE("repeated non-Perron eigenvalue stays real with independent eigenvectors") {
    // 0.2·I + 0.8·(1/3)11ᵀ has eigenvalues {0.2, 0.2, 1}.
    const RealMatrix a = 0.2 * RealMatrix::Identity(3, 3) + RealMatrix::Constant(3, 3, 0.8 / 3.0);
    const auto att = attention_from_matrix(a);
    CHECK(att.lambda(0) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(att.lambda(1) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(att.spectrum.eigenvalues.imag().cwiseAbs().maxCoeff() == 0.0);
    CHECK(att.spectrum.eigvec_condition < 1e6);
}

TEST_CASE("random Gaussian X, W_Q, W_K: valid, or rejected for a confirmed complex spectrum") {
    int valid = 0, complex_spectrum = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const RealMatrix x = gaussian(4, 4, 10 * seed);
        QueryKeyWeights w{gaussian(4, 4, 10 * seed + 1), gaussian(4, 4, 10 * seed + 2), 4};
        try {
            const auto a = softmax_attention(x, w);
            ++valid;
            CHECK((a.a.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
            CHECK(std::abs(a.spectrum.eigenvalues[a.perron_index] - 1.0) <= 1e-9);
            const ComplexVector ones = ComplexVector::Constant(4, 0.5);
            CHECK((a.spectrum.right_eigenvectors.col(a.perron_index) - ones).norm() <= 1e-8);
            CHECK(perron_gap(a) > 0.0);
        } catch (const Error& e) {
            REQUIRE(e.kind() == ErrorKind::ComplexSpectrum);
            ++complex_spectrum;
            const RealMatrix logits = (x * w.w_q) * (x * w.w_k).transpose() / 2.0;
            const RealMatrix a = rowwise_softmax(logits);
            CHECK(perron_check(a).max_imag > 1e-9);
            Eigen::EigenSolver<RealMatrix> es(a, false);
            CHECK(es.eigenvalues().imag().cwiseAbs().maxCoeff() > 1e-9);
        }
    }
    MESSAGE("valid " << valid << ", complex spectrum " << complex_spectrum);
    CHECK(valid + complex_spectrum == 200);
    CHECK(valid > 0);
}

TEST_CASE("Perron facts hold on 1000 random positive stochastic matrices") {
    Rng rng(77);
    int complex_count = 0;
    for (int t = 0; t < 1000; ++t) {
        const Index n = uniform_index(2, 8, rng);
        const RealMatrix a = rowwise_softmax(normal_matrix(n, n, 1.0, rng));
        const auto c = perron_check(a);
        CHECK(c.max_row_sum_error <= 1e-12);
        CHECK(c.eigenvalues_near_one == 1);
        CHECK(c.perron_vector_error <= 1e-8);
        CHECK(c.max_modulus <= 1.0 + 1e-9);
        if (c.max_imag > 1e-9)
            ++complex_count;
    }
    MESSAGE("complex spectra among 1000 samples: " << complex_count);
}

TEST_CASE("rejection sampler returns validated matrices") {
    Rng rng(5);
    for (Index n = 2; n <= 8; ++n) {
        const auto s = sample_attention(n, rng);
        CHECK(s.attention.n() == n);
        CHECK(s.rejections >= 0);
        for (Index k = 1; k < n; ++k)
            CHECK(s.attention.lambda(k - 1) <= s.attention.lambda(k));
        CHECK(s.attention.lambda(n - 1) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

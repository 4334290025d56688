#include "blockenc/block_encoding.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace blockenc;
using namespace testutil;

namespace {

ComplexMatrix diag(std::initializer_list<double> d) {
    Eigen::VectorXd v(d.size());
    int k = 0;
    for (double x : d) v(k++) = x;
    return v.cast<cplx>().asDiagonal();
}

}  // namespace

TEST_CASE("exactEncode fixtures") {
    auto be = exactEncode(ComplexMatrix::Identity(2, 2), 1.0);
    CHECK(spectralNorm(be.block() - ComplexMatrix::Identity(2, 2)) < 1e-14);
    CHECK(isUnitary(be.unitary));
    be = exactEncode(diag({0.5}), 1.0);
    CHECK(std::abs(be.block()(0, 0) - 0.5) < 1e-15);
    std::mt19937_64 rng(1);
    ComplexMatrix a = testutil::randomComplex(rng, 4, 4);
    be = exactEncode(a, spectralNorm(a));
    CHECK(spectralNorm(be.block() - a / spectralNorm(a)) < 1e-10);
    CHECK_THROWS_AS(exactEncode(a, 0.5 * spectralNorm(a)), Error);
}

TEST_CASE("product fixtures") {
    auto u = exactEncode(0.5 * ComplexMatrix::Identity(2, 2), 1.0);
    auto p = product(u, u);
    CHECK(spectralNorm(p.block() - 0.25 * ComplexMatrix::Identity(2, 2)) < 1e-14);
    CHECK(p.epsilon == 0.0);
    CHECK(p.ancillas == 2);

    std::mt19937_64 rng(2);
    ComplexMatrix a = testutil::randomComplex(rng, 3, 3), b = testutil::randomComplex(rng, 3, 3);
    a /= spectralNorm(a);
    b /= spectralNorm(b);
    auto ua = noisyEncode(a, 2.0, 1e-3, rng);
    auto vb = noisyEncode(b, 3.0, 2e-3, rng);
    auto pr = product(ua, vb);
    CHECK(pr.epsilon == doctest::Approx(7e-3));
    CHECK(pr.alpha == doctest::Approx(6.0));
    CHECK(pr.measuredError() <= pr.epsilon);
    CHECK(isUnitary(pr.unitary));
    CHECK(pr.ledger.totalQueries() == 2.0);
    CHECK_THROWS_AS(product(ua, exactEncode(ComplexMatrix::Identity(2, 2), 1.0)), Error);
}

TEST_CASE("amplify fixtures") {
    auto u = exactEncode(0.1 * ComplexMatrix::Identity(2, 2), 4.0);
    auto a = amplify(u, 1e-6);
    CHECK(a.alpha == doctest::Approx(std::sqrt(2.0)));
    CHECK(spectralNorm(a.block() - 0.1 / std::sqrt(2.0) * ComplexMatrix::Identity(2, 2)) < 1e-12);
    CHECK(a.ancillas == u.ancillas + 1);

    auto one = exactEncode(0.3 * ComplexMatrix::Identity(2, 2), 1.0);
    CHECK_NOTHROW(amplify(one, 0.1));

    std::mt19937_64 rng(3);
    auto noisy = noisyEncode(0.5 * ComplexMatrix::Identity(2, 2), 2.0, 1e-6, rng);
    auto b = amplify(noisy, 1e-6);
    CHECK(b.epsilon <= 2e-6 + 1e-18);
    CHECK(b.measuredError() <= b.epsilon);
}

TEST_CASE("preamplified product fixtures") {
    auto u = exactEncode(ComplexMatrix::Identity(2, 2), 2.0);
    auto p = preamplifiedProduct(u, u, 1e-3);
    CHECK(p.alpha == doctest::Approx(2.0));
    CHECK(p.ancillas == 2 * u.ancillas + 2);
    CHECK(spectralNorm(p.block() - 0.5 * ComplexMatrix::Identity(2, 2)) <= std::sqrt(2.0) * 1e-3);
    CHECK_THROWS_AS(preamplifiedProduct(u, u, 0.0), Error);

    std::mt19937_64 rng(4);
    auto a = noisyEncode(0.5 * ComplexMatrix::Identity(2, 2), 1.0, 1e-4, rng);
    auto b = noisyEncode(0.7 * ComplexMatrix::Identity(2, 2), 1.0, 1e-4, rng);
    auto q = preamplifiedProduct(a, b, 1e-4);
    CHECK(q.epsilon == doctest::Approx(std::sqrt(2.0) * 3e-4));
    CHECK(q.measuredError() <= q.epsilon);
}

TEST_CASE("complement fixtures") {
    ComplexMatrix one(1, 1);
    one(0, 0) = 1.0;
    auto c = complement(exactEncode(one, 1.0));
    ComplexMatrix x(2, 2);
    x << 0, 1, 1, 0;
    CHECK(spectralNorm(c.block() - x) < 1e-14);
    CHECK(c.ancillas == 2);
    CHECK(isUnitary(c.unitary));

    auto z = complement(exactEncode(ComplexMatrix::Zero(2, 2), 1.0));
    CHECK(spectralNorm(z.block()) < 1e-14);

    std::mt19937_64 rng(5);
    ComplexMatrix a = testutil::randomComplex(rng, 2, 3);
    auto r = complement(exactEncode(a, spectralNorm(a)));
    ComplexMatrix bar = ComplexMatrix::Zero(6, 6);
    ComplexMatrix p = padSquare(a);
    bar.topRightCorner(3, 3) = p;
    bar.bottomLeftCorner(3, 3) = p.adjoint();
    CHECK(spectralNorm(r.extracted() - bar) < 1e-10);
}

TEST_CASE("sparse access fixtures") {
    auto d = fromSparseAccess(denseOracles(diag({0.3, -0.7, 1.0})), 1, 1, 0.0);
    CHECK(d.alpha == doctest::Approx(1.0));
    CHECK(d.measuredError() < 1e-12);
    CHECK(isUnitary(d.unitary));

    ComplexMatrix tri = ComplexMatrix::Zero(4, 4);
    for (int i = 0; i < 4; ++i) {
        tri(i, i) = 0.5;
        if (i + 1 < 4) tri(i, i + 1) = tri(i + 1, i) = -0.25;
    }
    auto t = fromSparseAccess(denseOracles(tri), 3, 3, 0.0);
    CHECK(t.alpha == doctest::Approx(3.0));
    CHECK(spectralNorm(t.block() - tri / 3.0) < 1e-12);

    auto z = fromSparseAccess(denseOracles(ComplexMatrix::Zero(2, 2)), 1, 1, 0.0);
    CHECK(spectralNorm(z.block()) < 1e-14);

    CHECK_THROWS_AS(fromSparseAccess(denseOracles(tri), 1, 3, 0.0), Error);
}

TEST_CASE("fromKP fixtures") {
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
    KPTree tree = KPTree::fromMatrix(id);
    ComplexMatrix bar = ComplexMatrix::Zero(4, 4);
    bar.topRightCorner(2, 2).setIdentity();
    bar.bottomLeftCorner(2, 2).setIdentity();
    auto f = fromKP({&tree, nullptr, nullptr}, muOf(tree), 0.0);
    CHECK(spectralNorm(f.block() - bar / std::sqrt(2.0)) < 1e-12);
    CHECK(f.ancillas == 3);
    auto [p, q] = powerTrees(id, 0.5);
    auto g = fromKP({nullptr, &p, &q}, muOf(&p, &q, 0.5), 0.0);
    CHECK(spectralNorm(g.block() - bar) < 1e-12);
    CHECK_THROWS_AS(fromKP({nullptr, &p, nullptr}, MuParams{MuMode::PNorm, 0.5, 1.0}, 0.0), Error);
}

TEST_CASE("fromKP inner products equal the scaled entries") {
    std::mt19937_64 rng(6);
    Eigen::MatrixXd a = testutil::randomReal(rng, 3, 2);
    a(1, 0) = 0.0;
    for (double pw : {0.0, 0.3, 1.0}) {
        auto [p, q] = powerTrees(a, pw);
        MuParams mu = muOf(&p, &q, pw);
        KPStates st = kpStates({nullptr, &p, &q}, mu);
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 2; ++k) {
                cplx ip = 0.0;
                for (const auto& [label, amp] : st.psi[j]) {
                    auto it = st.phi[3 + k].find(label);
                    if (it != st.phi[3 + k].end()) ip += std::conj(amp) * it->second;
                }
                CHECK(std::abs(ip - a(j, k) / mu.value) < 1e-12);
            }
    }
}

TEST_CASE("lcu fixtures") {
    auto i2 = exactEncode(ComplexMatrix::Identity(2, 2), 1.0);
    auto m2 = exactEncode(-ComplexMatrix::Identity(2, 2), 1.0);
    auto z = lcu({i2, m2}, {0.5, 0.5});
    CHECK(spectralNorm(z.block()) < 1e-14);
    auto single = lcu({exactEncode(diag({0.2, 0.4}), 1.0)}, {1.0});
    CHECK(single.measuredError() < 1e-14);
    auto sum = lcu({exactEncode(diag({1, 0}), 1.0), exactEncode(diag({0, 1}), 1.0)}, {1.0, 1.0});
    CHECK(sum.alpha == doctest::Approx(2.0));
    CHECK(spectralNorm(sum.extracted() - ComplexMatrix::Identity(2, 2)) < 1e-12);
    CHECK_THROWS_AS(lcu({}, {}), Error);
}

TEST_CASE("applyToState fixtures") {
    StateVector b(2);
    b << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    auto r = applyToState(exactEncode(ComplexMatrix::Identity(2, 2), 1.0), b, 0.5, 1e-3);
    CHECK((r.state - b).norm() < 1e-12);
    r = applyToState(exactEncode(diag({1.0, 0.5}), 1.0), b, 0.5, 1e-3);
    StateVector ref(2);
    ref << 2.0 / std::sqrt(5.0), 1.0 / std::sqrt(5.0);
    CHECK((r.state - ref).norm() < 1e-12);
    std::mt19937_64 rng(7);
    auto noisy = noisyEncode(diag({1.0, 0.5}), 1.01, 1e-3, rng);
    CHECK_THROWS_AS(applyToState(noisy, b, 0.5, 1e-3), Error);
    CHECK_THROWS_AS(applyToState(exactEncode(diag({1.0, 0.0}), 1.0), b, 0.9, 1e-3), Error);
}

TEST_CASE("K-fold shared-ancilla products stay within 4K^2 eps") {
    std::mt19937_64 rng(8);
    for (int k : {2, 4, 8}) {
        std::vector<BlockEncoding> factors;
        for (int j = 0; j < k; ++j) {
            ComplexMatrix w = hermitianExp(testutil::randomHermitian(rng, 3), 1.0);
            ComplexMatrix shrink = ComplexMatrix::Identity(3, 3);
            shrink(j % 3, j % 3) = 1.0 - 1e-3;
            BlockEncoding f = encodeBlock(w * shrink, 1.0, 1, 1e-3, CostLedger::single("input"));
            f.target = w;
            factors.push_back(f);
        }
        auto prod = sharedAncillaProduct(factors);
        CHECK(prod.measuredError() <= prod.epsilon);
        CHECK(prod.epsilon == doctest::Approx(4.0 * k * k * 1e-3));
    }
}

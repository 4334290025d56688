#include "blockenc/applications.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

using namespace blockenc;
using namespace testutil;

namespace {

std::optional<ErrorKind> kindOf(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

StateVector direction(const Eigen::VectorXd& v) { return normalized(v.cast<cplx>()); }

}  // namespace

TEST_CASE("residual statistics") {
    RegressionProblem p;
    p.X = Eigen::MatrixXd(3, 1);
    p.X << 0.2, 0.4, 0.1;
    p.y = 3.0 * p.X.col(0);
    CHECK(residualStats(p) == doctest::Approx(0.0).epsilon(1e-12));
    p.y = Eigen::Vector3d(2.0, -1.0, 0.0);
    CHECK(residualStats(p) == doctest::Approx(1.0));
    p.X = Eigen::MatrixXd::Constant(2, 1, 0.5);
    p.y = Eigen::Vector2d(1.0, 0.0);
    CHECK(residualStats(p) == doctest::Approx(0.5));
    p.weights = Eigen::Vector2d(1.0, 4.0);
    // sqrt(W) X = (1,2)/2, sqrt(W) y = (1,0): projection 1/5
    CHECK(residualStats(p) == doctest::Approx(0.8));
}

TEST_CASE("regression validation") {
    RegressionProblem p;
    p.X = Eigen::MatrixXd::Identity(2, 3) * 0.5;
    p.y = Eigen::Vector2d(1.0, 1.0);
    CHECK(kindOf([&] { p.validate(); }) == ErrorKind::DimensionMismatch);
    p.X = Eigen::MatrixXd::Identity(2, 2) * 0.5;
    p.weights = Eigen::Vector2d(1.0, 0.5);
    CHECK(kindOf([&] { p.validate(); }) == ErrorKind::WeightOutOfRange);
    p.weights.reset();
    p.omega = Eigen::Matrix2d::Identity() * 2.0;
    CHECK(kindOf([&] { p.validate(); }) == ErrorKind::NormTooLarge);
    p.omega = Eigen::Matrix2d(Eigen::Vector2d(1.0, -0.5).asDiagonal());
    CHECK(kindOf([&] { p.validate(); }) == ErrorKind::InvalidArgument);
    p.omega.reset();
    p.X(1, 1) = 0.0;
    CHECK(kindOf([&] { p.validate(); }) == ErrorKind::Precondition);
}

TEST_CASE("normal equations oracle agrees with a whitened least-squares solve") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 20; ++t) {
        RegressionProblem p = t % 2 ? randomWLS(rng, 8, 4) : randomGLS(rng, 8, 4);
        Eigen::VectorXd ls = whitenedDesign(p).jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(whitenedTarget(p));
        CHECK((normalEquationsSolution(p) - ls).norm() < 1e-9 * std::max(1.0, ls.norm()));
    }
}

TEST_CASE("gls pipeline identity") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 20; ++t) {
        RegressionProblem p = randomGLS(rng, 8, 4);
        Eigen::LLT<Eigen::MatrixXd> llt(*p.omega);
        Eigen::MatrixXd lhs = (p.X.transpose() * llt.solve(p.X)).inverse() * p.X.transpose() * llt.solve(
                                  Eigen::MatrixXd::Identity(p.X.rows(), p.X.rows()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*p.omega);
        Eigen::MatrixXd ois = es.operatorInverseSqrt();
        ComplexMatrix rhs = pseudoinverse((ois * p.X).cast<cplx>()) * ois.cast<cplx>();
        CHECK((lhs.cast<cplx>() - rhs).norm() < 1e-8 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("wls fixtures") {
    const double eps = 1e-3;
    SUBCASE("identity design") {
        RegressionProblem p;
        p.X = Eigen::MatrixXd::Identity(2, 2);
        p.y = Eigen::Vector2d(0.3, -0.7);
        p.eta = 0.0;
        p.kappaA = 1.0;
        for (auto route : {WLSRoute::KPOnA, WLSRoute::Sparse}) {
            auto r = wlsSolve(p, route, eps);
            CHECK(fidelity(r.state, direction(p.y)) >= 1.0 - eps);
        }
        p.weights = Eigen::Vector2d::Ones();
        CHECK(fidelity(wlsSolve(p, WLSRoute::KPOnXWeights, eps).state, direction(p.y)) >= 1.0 - eps);
    }
    SUBCASE("noiseless line") {
        RegressionProblem p;
        p.X = Eigen::MatrixXd(2, 1);
        p.X << 0.6, 0.8;
        p.y = 2.0 * p.X.col(0);
        p.eta = 0.01;
        for (auto route : {WLSRoute::KPOnA, WLSRoute::Sparse}) {
            auto r = wlsSolve(p, route, eps);
            REQUIRE(r.state.size() == 1);
            CHECK(std::abs(r.state(0)) == doctest::Approx(1.0));
        }
    }
    SUBCASE("reweighting") {
        RegressionProblem p;
        p.X = Eigen::MatrixXd(3, 2);
        p.X << 0.2, 0.1, 0.1, 0.3, 0.3, -0.1;
        p.y = Eigen::Vector3d(1.0, 0.2, 0.5);
        p.kappaA = 8.0;
        p.eta = 0.9;
        const Eigen::VectorXd plain = normalEquationsSolution(p);
        p.weights = Eigen::Vector3d(1.0, 4.0, 1.0);
        const Eigen::VectorXd weighted = normalEquationsSolution(p);
        CHECK(fidelity(direction(plain), direction(weighted)) < 0.999);
        for (auto route : {WLSRoute::KPOnA, WLSRoute::KPOnXWeights, WLSRoute::Sparse}) {
            auto r = wlsSolve(p, route, eps);
            CHECK(fidelity(r.state, direction(weighted)) >= 1.0 - eps);
            CHECK(r.gammaLower == doctest::Approx(1.0 - p.eta));
            CHECK(r.overlap >= r.gammaLower);
            CHECK(r.ledger.totalQueries() > 0.0);
        }
    }
}

TEST_CASE("wls errors") {
    RegressionProblem p;
    p.X = Eigen::MatrixXd::Constant(2, 1, 0.5);
    p.y = Eigen::Vector2d(1.0, 0.0);
    p.eta = 0.3;
    CHECK(kindOf([&] { wlsSolve(p, WLSRoute::KPOnA, 1e-3); }) == ErrorKind::ResidualViolation);
    p.eta = 0.6;
    CHECK(kindOf([&] { wlsSolve(p, WLSRoute::KPOnXWeights, 1e-3); }) == ErrorKind::MissingStorage);
    p.X *= 4.0;
    CHECK(kindOf([&] { wlsSolve(p, WLSRoute::KPOnA, 1e-3); }) == ErrorKind::NormTooLarge);
}

TEST_CASE("wls random suite") {
    std::mt19937_64 rng(101);
    const double eps = 1e-3;
    for (auto route : {WLSRoute::KPOnA, WLSRoute::KPOnXWeights, WLSRoute::Sparse}) {
        for (int t = 0; t < 30; ++t) {
            RegressionProblem p = randomWLS(rng, 8, 4);
            auto r = wlsSolve(p, route, eps);
            CHECK(fidelity(r.state, direction(normalEquationsSolution(p))) >= 1.0 - eps);
            CHECK(r.gammaLower == doctest::Approx(1.0 - p.eta));
            CHECK(r.overlap >= r.gammaLower);
        }
    }
}

TEST_CASE("gls fixtures") {
    const double eps = 1e-3;
    RegressionProblem p;
    p.X = Eigen::MatrixXd(3, 2);
    p.X << 0.5, 0.1, 0.1, 0.6, 0.4, -0.2;
    p.y = Eigen::Vector3d(1.0, 0.2, 0.5);
    p.kappaA = 8.0;
    p.eta = 0.9;
    const Eigen::VectorXd ols = normalEquationsSolution(p);
    SUBCASE("identity covariance matches ols") {
        p.omega = Eigen::Matrix3d::Identity();
        for (auto route : {GLSRoute::OmegaInverseSqrt, GLSRoute::Omega, GLSRoute::KP, GLSRoute::Sparse}) {
            CHECK(fidelity(glsSolve(p, route, eps).state, direction(ols)) >= 1.0 - eps);
        }
    }
    SUBCASE("diagonal covariance matches wls") {
        p.omega = Eigen::Matrix3d(Eigen::Vector3d(1.0, 0.25, 1.0).asDiagonal());
        p.kappaOmega = 4.0;
        RegressionProblem w = p;
        w.omega.reset();
        w.weights = Eigen::Vector3d(1.0, 4.0, 1.0);
        w.X *= 0.5;
        w.y *= 0.5;
        const Eigen::VectorXd wls = normalEquationsSolution(w);
        CHECK((normalEquationsSolution(p) - wls).norm() < 1e-10);
        for (auto route : {GLSRoute::OmegaInverseSqrt, GLSRoute::Omega, GLSRoute::KP, GLSRoute::Sparse}) {
            auto r = glsSolve(p, route, eps);
            CHECK(fidelity(r.state, direction(wls)) >= 1.0 - eps);
            CHECK(r.kappa == doctest::Approx(16.0));
        }
        CHECK(fidelity(glsSolve(p, GLSRoute::Omega, eps).state, wlsSolve(w, WLSRoute::KPOnA, eps).state) >=
              1.0 - 2.0 * eps);
    }
    SUBCASE("errors") {
        CHECK(kindOf([&] { glsSolve(p, GLSRoute::Omega, eps); }) == ErrorKind::MissingStorage);
        p.omega = Eigen::Matrix3d(Eigen::Vector3d(1.0, 0.1, 1.0).asDiagonal());
        p.kappaOmega = 4.0;
        CHECK(kindOf([&] { glsSolve(p, GLSRoute::OmegaInverseSqrt, eps); }).has_value());
        p.kappaOmega = 10.0;
        p.eta = 0.0;
        CHECK(kindOf([&] { glsSolve(p, GLSRoute::Omega, eps); }) == ErrorKind::ResidualViolation);
    }
}

TEST_CASE("gls random suite") {
    std::mt19937_64 rng(202);
    const double eps = 1e-3;
    for (auto route : {GLSRoute::OmegaInverseSqrt, GLSRoute::Omega, GLSRoute::KP, GLSRoute::Sparse}) {
        for (int t = 0; t < 30; ++t) {
            // Composed data-structure encodings are materialized in full; 3 rows is what fits 14 qubits.
            RegressionProblem p = route == GLSRoute::KP ? randomGLS(rng, 3, 2) : randomGLS(rng, 8, 4);
            auto r = glsSolve(p, route, eps);
            CHECK(fidelity(r.state, direction(normalEquationsSolution(p))) >= 1.0 - eps);
            CHECK(r.overlap >= r.gammaLower);
        }
    }
}

TEST_CASE("regression problem loading") {
    const auto dir = std::filesystem::temp_directory_path() / "blockenc_regression_fixture";
    std::filesystem::create_directories(dir);
    ComplexMatrix x(2, 1);
    x << 0.6, 0.8;
    ComplexMatrix y(2, 1);
    y << 1.2, 1.6;
    writeMatrixMarket((dir / "x.mtx").string(), x);
    writeMatrixMarket((dir / "y.mtx").string(), y);
    {
        std::ofstream j(dir / "p.json");
        j << R"({"X": "x.mtx", "y": "y.mtx", "kappa": 2, "eta": 0.1})";
    }
    RegressionProblem p = loadRegressionProblem((dir / "p.json").string());
    CHECK(p.X.rows() == 2);
    CHECK(p.y(1) == doctest::Approx(1.6));
    CHECK(p.eta == doctest::Approx(0.1));
    {
        std::ofstream j(dir / "bad.json");
        j << R"({"X": "x.mtx", "kappa": 2, "eta": 0.1})";
    }
    CHECK(kindOf([&] { loadRegressionProblem((dir / "bad.json").string()); }) == ErrorKind::Config);
    std::filesystem::remove_all(dir);
}

TEST_CASE("network assembly") {
    auto p3 = buildNetwork({{0, 1, 1.0}, {1, 2, 1.0}});
    Eigen::Matrix3d expected;
    expected << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK((p3.laplacian - expected).norm() < 1e-15);
    CHECK(p3.maxDegree == 2);
    CHECK(p3.lambda2 == doctest::Approx(1.0));

    std::mt19937_64 rng(9);
    for (int t = 0; t < 30; ++t) {
        auto net = randomNetwork(rng, 8);
        CHECK((net.laplacian - net.C * net.C.transpose()).norm() < 1e-12);
        CHECK((net.laplacian * Eigen::VectorXd::Ones(net.vertices)).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(net.laplacian);
        CHECK(es.eigenvalues().maxCoeff() <= 2.0 * net.wMax * net.maxDegree + 1e-12);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(net.C);
        const auto& s = svd.singularValues();
        double smin = s(0);
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > 1e-9) smin = std::min(smin, s(i));
        CHECK(s(0) / smin <= networkKappa(net, net.lambda2) + 1e-9);
    }

    CHECK(kindOf([] { buildNetwork({{0, 1, 1.0}, {2, 3, 1.0}}); }) == ErrorKind::DisconnectedGraph);
    CHECK(kindOf([] { buildNetwork({{0, 1, 0.5}}); }) == ErrorKind::WeightOutOfRange);
    CHECK(kindOf([] { buildNetwork({{0, 1, 3.0}}, 2.0); }) == ErrorKind::WeightOutOfRange);
    CHECK(kindOf([] { buildNetwork({{1, 1, 1.0}}); }) == ErrorKind::SameVertex);
    CHECK(kindOf([] { buildNetwork({}); }) == ErrorKind::EmptyList);
}

TEST_CASE("edge list parsing") {
    std::istringstream in("# path\n0 1 2.5\n\n1 2   # unit weight\n");
    auto edges = parseEdgeList(in);
    REQUIRE(edges.size() == 2);
    CHECK(edges[0].w == 2.5);
    CHECK(edges[1].w == 1.0);
    std::istringstream bad("0\n");
    CHECK(kindOf([&] { parseEdgeList(bad); }) == ErrorKind::Config);
    std::istringstream extra("0 1 1 7\n");
    CHECK(kindOf([&] { parseEdgeList(extra); }) == ErrorKind::Config);
}

TEST_CASE("external currents") {
    auto c = ExternalCurrent::between(3, 0, 2);
    CHECK(c.values.sum() == 0.0);
    CHECK(c.norm() == doctest::Approx(std::sqrt(2.0)));
    CHECK(kindOf([] { ExternalCurrent::between(3, 1, 1); }) == ErrorKind::SameVertex);
    CHECK(kindOf([] { ExternalCurrent::between(3, 0, 5); }) == ErrorKind::IndexOutOfRange);
    ExternalCurrent bad{Eigen::Vector3d(1.0, 0.0, 0.0)};
    CHECK(kindOf([&] { bad.validate(3); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("electrical network estimates") {
    const double eps = 0.1, delta = 1.0 / 3.0;
    std::mt19937_64 rng(31);
    SUBCASE("single edge") {
        for (double w : {1.0, 2.0, 5.0}) {
            auto net = buildNetwork({{0, 1, w}});
            auto r = effectiveResistance(net, 0, 1, eps, delta, rng);
            CHECK(r.reference == doctest::Approx(1.0 / w));
            CHECK(std::abs(r.estimate / r.reference - 1.0) <= eps);
        }
    }
    SUBCASE("path and complete graph") {
        auto p3 = buildNetwork({{0, 1, 1.0}, {1, 2, 1.0}});
        for (auto route : {NetworkRoute::Dense, NetworkRoute::Sparse}) {
            auto r = dissipatedPower(p3, ExternalCurrent::between(3, 0, 2), route, eps, delta, rng);
            CHECK(r.reference == doctest::Approx(2.0));
            CHECK(std::abs(r.estimate / 2.0 - 1.0) <= eps);
            CHECK(r.kappa == doctest::Approx(2.0));
        }
        std::vector<Edge> k4;
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = a + 1; b < 4; ++b) k4.push_back({a, b, 1.0});
        auto net = buildNetwork(k4);
        auto r = effectiveResistance(net, 1, 3, eps, delta, rng);
        CHECK(r.reference == doctest::Approx(0.5));
        CHECK(std::abs(r.estimate / 0.5 - 1.0) <= eps);
        CHECK(r.kappa == doctest::Approx(std::sqrt(6.0 / net.lambda2)));
    }
    SUBCASE("gap bound") {
        auto p3 = buildNetwork({{0, 1, 1.0}, {1, 2, 1.0}});
        CHECK(kindOf([&] {
                  dissipatedPower(p3, ExternalCurrent::between(3, 0, 2), NetworkRoute::Dense, eps, delta, rng, 1.5);
              }) == ErrorKind::GapViolation);
        auto loose = dissipatedPower(p3, ExternalCurrent::between(3, 0, 2), NetworkRoute::Dense, eps, delta, rng, 0.25);
        CHECK(loose.kappa == doctest::Approx(std::sqrt(16.0)));
        CHECK(std::abs(loose.estimate / 2.0 - 1.0) <= eps);
    }
}

TEST_CASE("random networks") {
    std::mt19937_64 rng(77);
    const double eps = 0.1, delta = 1.0 / 3.0;
    for (int t = 0; t < 20; ++t) {
        auto net = randomNetwork(rng, 8);
        std::uniform_int_distribution<std::size_t> vd(0, net.vertices - 1);
        std::size_t s = vd(rng), u = vd(rng);
        while (u == s) u = vd(rng);
        auto cur = ExternalCurrent::between(net.vertices, s, u);
        CHECK(pseudoinverseIdentityError(net, cur) <= 1e-9);
        auto r = effectiveResistance(net, s, u, eps, delta, rng);
        CHECK(std::abs(r.estimate / r.reference - 1.0) <= eps);
        Eigen::VectorXd gen = testutil::randomReal(rng, net.vertices, 1).col(0);
        gen.array() -= gen.mean();
        CHECK(pseudoinverseIdentityError(net, ExternalCurrent{gen}) <= 1e-9);
    }
}

#pragma once

#include "blockenc/applications.hpp"
#include "blockenc/variable_time.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace testutil {

using namespace blockenc;

inline constexpr double kPi = 3.14159265358979323846;

inline BlockEncoding noisyEncode(const ComplexMatrix& a, double alpha, double eps, std::mt19937_64& rng) {
    ComplexMatrix noise = randomComplex(rng, a.rows(), a.cols());
    noise *= eps / spectralNorm(noise);
    BlockEncoding be = encodeBlock((a + noise) / alpha, alpha, 1, eps, CostLedger::single("input"));
    be.target = a;
    return be;
}

inline Eigen::MatrixXd orthonormal(std::mt19937_64& rng, int r, int c) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(randomReal(rng, r, r));
    Eigen::MatrixXd q = qr.householderQ();
    return q.leftCols(c);
}

inline Eigen::MatrixXd withSingularValues(std::mt19937_64& rng, int m, int n, double lo) {
    std::uniform_real_distribution<double> u(lo, 1.0);
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s(i) = u(rng);
    s(0) = 1.0;
    s(n - 1) = lo;
    return orthonormal(rng, m, n) * s.asDiagonal() * orthonormal(rng, n, n).transpose();
}

// Target close to the column space, eta set just above the measured residual.
inline void finishProblem(std::mt19937_64& rng, RegressionProblem& p, const Eigen::MatrixXd& a, double noise) {
    Eigen::VectorXd beta = randomReal(rng, a.cols(), 1).col(0);
    Eigen::VectorXd r = randomReal(rng, a.rows(), 1).col(0);
    Eigen::VectorXd yw = a * beta + noise * (a * beta).norm() * r / r.norm();
    if (p.omega) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*p.omega);
        p.y = es.operatorSqrt() * yw;
    } else if (p.weights) {
        p.y = p.weights->cwiseSqrt().cwiseInverse().asDiagonal() * yw;
    } else {
        p.y = yw;
    }
    p.eta = std::min(0.9, residualStats(p) + 0.05);
}

inline RegressionProblem randomWLS(std::mt19937_64& rng, int maxM, int maxN) {
    std::uniform_int_distribution<int> nd(1, maxN);
    const int n = nd(rng);
    std::uniform_int_distribution<int> md(n, maxM);
    const int m = md(rng);
    std::uniform_real_distribution<double> wd(1.0, 4.0);
    RegressionProblem p;
    p.kappaA = 4.0;
    Eigen::VectorXd w(m);
    for (int i = 0; i < m; ++i) w(i) = wd(rng);
    p.weights = w;
    const Eigen::MatrixXd a = withSingularValues(rng, m, n, 1.0 / p.kappaA);
    p.X = w.cwiseSqrt().cwiseInverse().asDiagonal() * a;
    finishProblem(rng, p, a, 0.2);
    return p;
}

inline RegressionProblem randomGLS(std::mt19937_64& rng, int maxM, int maxN) {
    std::uniform_int_distribution<int> nd(1, maxN);
    const int n = nd(rng);
    std::uniform_int_distribution<int> md(n, maxM);
    const int m = md(rng);
    RegressionProblem p;
    p.kappaA = 4.0;
    p.kappaOmega = 4.0;
    p.X = withSingularValues(rng, m, n, 1.0 / p.kappaA);
    std::uniform_real_distribution<double> ld(1.0 / p.kappaOmega, 1.0);
    Eigen::VectorXd lam(m);
    for (int i = 0; i < m; ++i) lam(i) = ld(rng);
    lam(0) = 1.0;
    if (m > 1) lam(m - 1) = 1.0 / p.kappaOmega;
    const Eigen::MatrixXd q = orthonormal(rng, m, m);
    p.omega = q * lam.asDiagonal() * q.transpose();
    *p.omega = 0.5 * (*p.omega + p.omega->transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*p.omega);
    finishProblem(rng, p, es.operatorInverseSqrt() * p.X, 0.2);
    return p;
}

inline ElectricalNetwork randomNetwork(std::mt19937_64& rng, std::size_t maxN) {
    std::uniform_int_distribution<std::size_t> nd(2, maxN);
    const std::size_t n = nd(rng);
    std::uniform_real_distribution<double> wd(1.0, 3.0);
    std::vector<Edge> edges;
    std::set<std::pair<std::size_t, std::size_t>> used;
    for (std::size_t v = 1; v < n; ++v) {
        std::uniform_int_distribution<std::size_t> pd(0, v - 1);
        const std::size_t u = pd(rng);
        edges.push_back({u, v, wd(rng)});
        used.insert({u, v});
    }
    std::uniform_int_distribution<std::size_t> vd(0, n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t a = vd(rng), b = vd(rng);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!used.insert({a, b}).second) continue;
        edges.push_back({a, b, wd(rng)});
    }
    return buildNetwork(edges);
}

inline VSTA randomVSTA(std::mt19937_64& rng, int branches, int stages, double badBias) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    VSTA v;
    double t = 0.0;
    for (int j = 0; j < stages; ++j) {
        t += 0.5 + 10.0 * u(rng) * (j + 1);
        v.stoppingTimes.push_back(t);
    }
    Eigen::HouseholderQR<ComplexMatrix> qr(randomComplex(rng, branches + 1, branches + 1));
    ComplexMatrix q = qr.householderQ();
    v.branchBasis = q.leftCols(branches);
    v.stopProbability.resize(branches, stages);
    v.goodAmplitude.resize(branches, stages);
    for (int i = 0; i < branches; ++i) {
        double sum = 0.0;
        for (int j = 0; j < stages; ++j) sum += (v.stopProbability(i, j) = u(rng) + 1e-3);
        v.stopProbability.row(i) /= sum;
        for (int j = 0; j < stages; ++j) {
            const double mag = std::pow(u(rng), badBias);
            v.goodAmplitude(i, j) = std::polar(mag, 2.0 * kPi * u(rng));
        }
    }
    return v;
}

inline StateVector inSpan(std::mt19937_64& rng, const VSTA& v) {
    StateVector c = randomComplex(rng, v.branchBasis.cols(), 1);
    return normalized(v.branchBasis * c);
}

}  // namespace testutil

#include "blockenc/hamsim.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace blockenc {

namespace {

void requireSquareSystem(const BlockEncoding& u) {
    if (u.systemDim == 0) fail(ErrorKind::InvalidArgument, "empty encoding");
}

ComplexMatrix effectiveHamiltonian(const BlockEncoding& u) { return hermitianPart(u.extracted()); }

RealVector eigenvalues(const ComplexMatrix& h) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitianPart(h), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

BlockEncoding unitaryFactor(const ComplexMatrix& w, int ancillas, double eps, CostLedger ledger) {
    return encodeBlock(w, 1.0, ancillas, eps, std::move(ledger));
}

}  // namespace

double hamSimQueries(double alpha, double t, double eps) {
    if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
    return std::ceil(2.0 * std::abs(alpha * t) + std::log(2.0 / std::min(eps, 1.0)));
}

BlockEncoding blockHamSim(const BlockEncoding& uH, double t, double eps) {
    requireSquareSystem(uH);
    if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
    if (t != 0.0 && uH.epsilon > eps / std::abs(2.0 * t)) {
        fail(ErrorKind::InputTooNoisy, "input error " + std::to_string(uH.epsilon) + " exceeds eps/|2t|");
    }
    const ComplexMatrix w = hermitianExp(effectiveHamiltonian(uH), t);
    const double q = hamSimQueries(uH.alpha, t, eps);
    CostLedger ledger = uH.ledger.scaled(q);
    ledger.gates += (uH.ancillas + 1) * q;
    BlockEncoding out = unitaryFactor(w, uH.ancillas + 2, eps, std::move(ledger));
    if (uH.target) out.target = hermitianExp(hermitianPart(*uH.target), t);
    return out;
}

long signedIndex(std::size_t u, int J) {
    long m = static_cast<long>(u & ((std::size_t{1} << J) - 1));
    if ((u >> J) & 1U) m -= static_cast<long>(std::size_t{1} << J);
    return m;
}

namespace {

int checkedLog2(std::size_t M) {
    if (M == 0 || (M & (M - 1)) != 0) fail(ErrorKind::NotPowerOfTwo, "M = " + std::to_string(M));
    return ceilLog2(M);
}

void checkControlledNoise(const BlockEncoding& uH, int J, std::size_t M, double gamma, double eps) {
    const double budget = eps / std::abs(8.0 * (J + 1) * (J + 1) * static_cast<double>(M) * gamma);
    if (gamma != 0.0 && uH.epsilon > budget) {
        fail(ErrorKind::InputTooNoisy, "input error exceeds eps/|8(J+1)^2 M gamma|");
    }
}

// Factor j applies exp(i s 2^j gamma H) on control bit j, s = -1 for the top bit.
ComplexMatrix controlledFactor(const ComplexMatrix& h, int J, int j, double gamma) {
    const Eigen::Index n = h.rows();
    const std::size_t ctrl = std::size_t{2} << J;
    const double sign = j == J ? -1.0 : 1.0;
    const ComplexMatrix e = hermitianExp(h, sign * std::ldexp(gamma, j));
    ComplexMatrix out = ComplexMatrix::Identity(ctrl * n, ctrl * n);
    for (std::size_t u = 0; u < ctrl; ++u)
        if ((u >> j) & 1U) out.block(u * n, u * n, n, n) = e;
    return out;
}

ComplexMatrix controlledDirect(const ComplexMatrix& h, int J, double gamma) {
    const Eigen::Index n = h.rows();
    const std::size_t ctrl = std::size_t{2} << J;
    ComplexMatrix out = ComplexMatrix::Zero(ctrl * n, ctrl * n);
    for (std::size_t u = 0; u < ctrl; ++u)
        out.block(u * n, u * n, n, n) = hermitianExp(h, static_cast<double>(signedIndex(u, J)) * gamma);
    return out;
}

}  // namespace

CostLedger controlledHamSimCost(const BlockEncoding& uH, std::size_t M, double gamma, double eps) {
    const int J = checkedLog2(M);
    const double epsF = eps / (4.0 * (J + 1) * (J + 1));
    CostLedger total;
    for (int j = 0; j <= J; ++j) {
        const double q = hamSimQueries(uH.alpha, std::ldexp(gamma, j), epsF);
        CostLedger l = uH.ledger.scaled(q);
        l.gates += (uH.ancillas + 1) * q;
        total += l;
    }
    return total;
}

BlockEncoding controlledHamSim(const BlockEncoding& uH, std::size_t M, double gamma, double eps) {
    requireSquareSystem(uH);
    if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
    const int J = checkedLog2(M);
    checkControlledNoise(uH, J, M, gamma, eps);
    const std::size_t dim = (std::size_t{2} << J) * uH.systemDim;
    checkCapacity(dim << (uH.ancillas + 2), "controlled simulation");
    const double epsF = eps / (4.0 * (J + 1) * (J + 1));
    const ComplexMatrix h = effectiveHamiltonian(uH);
    std::optional<ComplexMatrix> ht;
    if (uH.target) ht = hermitianPart(*uH.target);
    std::vector<BlockEncoding> factors;
    for (int j = 0; j <= J; ++j) {
        const double q = hamSimQueries(uH.alpha, std::ldexp(gamma, j), epsF);
        CostLedger l = uH.ledger.scaled(q);
        l.gates += (uH.ancillas + 1) * q;
        BlockEncoding f = unitaryFactor(controlledFactor(h, J, j, gamma), uH.ancillas + 2, epsF, std::move(l));
        if (ht) f.target = controlledFactor(*ht, J, j, gamma);
        factors.push_back(std::move(f));
    }
    BlockEncoding out = sharedAncillaProduct(factors);
    if (ht) out.target = controlledDirect(*ht, J, gamma);
    return out;
}

int TaylorSeries::truncationDegree(double epsPrime) const {
    const double q = radius / (radius + tailBudget);
    int d = 0;
    if (q > 0.0) {
        d = static_cast<int>(std::ceil(std::log(epsPrime * (1.0 - q) / 2.0) / std::log(q))) - 1;
        d = std::max(d, 0);
    }
    if (degree) d = std::min(d, *degree);
    return d;
}

double TaylorSeries::partialEnvelope(int d) const {
    double s = 0.0, p = 1.0;
    const double rr = radius + tailBudget;
    for (int l = 0; l <= d; ++l, p *= rr) s += std::abs(coefficient(l)) * p;
    return s;
}

double TaylorSeries::envelopeBound(double epsPrime) const {
    const int d = truncationDegree(epsPrime);
    const double partial = partialEnvelope(d);
    if (degree && d >= *degree) return partial;
    if (envelopeClosedForm) return std::max(partial, *envelopeClosedForm);
    const double rr = radius + tailBudget;
    double prev = std::abs(coefficient(d)) * std::pow(rr, d);
    double s = partial;
    for (int l = d + 1; l < d + 200000; ++l) {
        const double term = std::abs(coefficient(l)) * std::pow(rr, l);
        s += term;
        const double rho = prev > 0.0 ? term / prev : 0.0;
        prev = term;
        if (rho < 1.0 && term * rho / (1.0 - rho) <= 1e-15 * envelope) return s + term * rho / (1.0 - rho);
    }
    return s;
}

double TaylorSeries::evaluate(double x, int d) const {
    double acc = 0.0;
    for (int l = d; l >= 0; --l) acc = acc * (x - center) + coefficient(l);
    return acc;
}

TaylorSeries fromPolynomial(double center, double radius, double tailBudget, double envelope,
                            std::vector<double> coeffs) {
    TaylorSeries s;
    s.center = center;
    s.radius = radius;
    s.tailBudget = tailBudget;
    s.envelope = envelope;
    s.degree = static_cast<int>(coeffs.size()) - 1;
    s.coefficient = [c = std::move(coeffs)](int l) { return l < static_cast<int>(c.size()) ? c[l] : 0.0; };
    return s;
}

BlockEncoding smoothFunction(const BlockEncoding& uH, const TaylorSeries& series, double epsPrime) {
    requireSquareSystem(uH);
    if (!(epsPrime > 0.0 && epsPrime <= 0.5)) fail(ErrorKind::OutOfRange, "epsPrime must lie in (0, 1/2]");
    if (!(series.radius > 0.0) || !(series.tailBudget > 0.0) || series.tailBudget > series.radius) {
        fail(ErrorKind::InvalidArgument, "need 0 < delta <= r");
    }
    const double bound = series.envelopeBound(epsPrime);
    if (bound > series.envelope * (1.0 + kConstructTol)) {
        fail(ErrorKind::Precondition, "envelope " + std::to_string(bound) + " exceeds B = " +
                                          std::to_string(series.envelope));
    }
    const ComplexMatrix h = effectiveHamiltonian(uH);
    const ComplexMatrix shifted = h - series.center * ComplexMatrix::Identity(h.rows(), h.cols());
    if (spectralNorm(shifted) > series.radius + uH.epsilon + kConstructTol) {
        fail(ErrorKind::SpectrumOutsideRadius, "||H - x0 I|| exceeds r");
    }
    if (uH.epsilon > series.tailBudget * epsPrime / 2.0) {
        fail(ErrorKind::InputTooNoisy, "input error exceeds delta * epsPrime / 2");
    }
    const int d = series.truncationDegree(epsPrime);
    ComplexMatrix f = ComplexMatrix::Zero(h.rows(), h.cols());
    for (int l = d; l >= 0; --l) {
        f = f * shifted;
        f.diagonal().array() += series.coefficient(l);
    }
    const double steps = std::ceil(series.radius * std::log(1.0 / epsPrime) / series.tailBudget);
    const std::size_t M = nextPow2(static_cast<std::size_t>(std::max(1.0, steps)));
    const double gamma = 1.0 / series.radius;
    CostLedger ledger = controlledHamSimCost(uH, M, gamma, epsPrime / 2.0);
    ledger.gates += series.radius / series.tailBudget *
                    std::log(series.radius / (series.tailBudget * epsPrime)) * std::log(1.0 / epsPrime);
    BlockEncoding out =
        encodeBlock(f / series.envelope, series.envelope, uH.ancillas + 1, series.envelope * epsPrime, ledger);
    if (uH.target && series.exact) out.target = hermitianFunction(*uH.target, [&](double x) {
        return cplx(series.exact(x), 0.0);
    });
    return out;
}

TaylorSeries negativePowerSeries(double c, double kappa) {
    TaylorSeries s;
    s.center = 1.0;
    s.radius = 1.0 - 1.0 / kappa;
    s.tailBudget = 1.0 / (2.0 * kappa * std::max(1.0, c));
    s.envelope = 2.0 * std::pow(kappa, c);
    s.envelopeClosedForm = std::pow(1.0 - s.radius - s.tailBudget, -c);
    auto cache = std::make_shared<std::vector<double>>(1, 1.0);
    s.coefficient = [c, cache](int l) {
        while (static_cast<int>(cache->size()) <= l) {
            const int k = static_cast<int>(cache->size());
            cache->push_back(cache->back() * (-c - k + 1) / k);
        }
        return (*cache)[l];
    };
    s.exact = [c](double x) { return std::pow(x, -c); };
    return s;
}

TaylorSeries positivePowerSeries(double c, double kappa) {
    TaylorSeries s;
    s.center = 1.0;
    s.radius = 1.0 - 1.0 / kappa;
    s.tailBudget = 1.0 / kappa;
    s.envelope = 2.0;
    s.envelopeClosedForm = 2.0;
    auto cache = std::make_shared<std::vector<double>>(1, 1.0);
    s.coefficient = [c, cache](int l) {
        while (static_cast<int>(cache->size()) <= l) {
            const int k = static_cast<int>(cache->size());
            cache->push_back(cache->back() * (c - k + 1) / k);
        }
        return (*cache)[l];
    };
    s.exact = [c](double x) { return std::pow(x, c); };
    return s;
}

namespace {

void checkPositiveSpectrum(const BlockEncoding& uH, double kappa) {
    const RealVector ev = eigenvalues(uH.extracted());
    const double tol = uH.epsilon + 1e-9;
    if (ev.minCoeff() < 1.0 / kappa - tol || ev.maxCoeff() > 1.0 + tol) {
        fail(ErrorKind::SpectrumViolation, "spectrum outside [1/kappa, 1]");
    }
}

void checkSplitSpectrum(const BlockEncoding& uH, double kappa) {
    const RealVector ev = eigenvalues(uH.extracted());
    const double tol = uH.epsilon + 1e-9;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const double a = std::abs(ev(i));
        if (a < 1.0 / kappa - tol || a > 1.0 + tol) {
            fail(ErrorKind::SpectrumViolation, "spectrum outside [-1,-1/kappa] u [1/kappa,1]");
        }
    }
}

BlockEncoding spectralPower(const BlockEncoding& uH, const TaylorSeries& series, double power, double eps) {
    if (uH.epsilon > series.tailBudget * eps / (2.0 * series.envelope)) {
        fail(ErrorKind::InputTooNoisy, "input error too large for the requested precision");
    }
    auto f = [power](double x) {
        return cplx(std::copysign(std::pow(std::abs(x), power), x), 0.0);
    };
    const double epsPrime = std::min(0.5, eps / series.envelope);
    const double steps = std::ceil(series.radius * std::log(1.0 / epsPrime) / series.tailBudget);
    const std::size_t M = nextPow2(static_cast<std::size_t>(std::max(1.0, steps)));
    CostLedger ledger = controlledHamSimCost(uH, M, 1.0 / series.radius, epsPrime / 2.0);
    ledger.gates += series.radius / series.tailBudget *
                    std::log(series.radius / (series.tailBudget * epsPrime)) * std::log(1.0 / epsPrime);
    const ComplexMatrix fh = hermitianFunction(uH.extracted(), f);
    BlockEncoding out = encodeBlock(fh / series.envelope, series.envelope, uH.ancillas + 1, eps, ledger);
    if (uH.target) out.target = hermitianFunction(*uH.target, f);
    return out;
}

}  // namespace

BlockEncoding negativePower(const BlockEncoding& uH, double c, double kappa, double eps, PowerPath path) {
    if (!(c > 0.0)) fail(ErrorKind::OutOfRange, "c must be positive");
    if (!(kappa >= 2.0)) fail(ErrorKind::OutOfRange, "kappa must be at least 2");
    if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
    const TaylorSeries series = negativePowerSeries(c, kappa);
    if (path == PowerPath::Spectral) {
        checkSplitSpectrum(uH, kappa);
        return spectralPower(uH, series, -c, eps);
    }
    checkPositiveSpectrum(uH, kappa);
    return smoothFunction(uH, series, std::min(0.5, eps / series.envelope));
}

BlockEncoding positivePower(const BlockEncoding& uH, double c, double kappa, double eps, PowerPath path) {
    if (!(c > 0.0 && c <= 1.0)) fail(ErrorKind::OutOfRange, "c must lie in (0, 1]");
    if (!(kappa >= 2.0)) fail(ErrorKind::OutOfRange, "kappa must be at least 2");
    if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
    checkPositiveSpectrum(uH, kappa);
    const TaylorSeries series = positivePowerSeries(c, kappa);
    if (path == PowerPath::Spectral) return spectralPower(uH, series, c, eps);
    return smoothFunction(uH, series, std::min(0.5, eps / series.envelope));
}

double patchFunction(double x, double lambda) {
    if (std::abs(x) >= lambda) return 1.0 / x;
    return x / (lambda * lambda);
}

StateVector FlaggedUnitary::flagged(const StateVector& psi) const {
    if (static_cast<std::size_t>(psi.size()) != systemDim) fail(ErrorKind::DimensionMismatch, "state size");
    const std::size_t half = systemDim << qubitsQ;
    StateVector in = StateVector::Zero(2 * half);
    in.head(systemDim) = psi;
    StateVector out = unitary * in;
    return out.segment(half, systemDim);
}

double patchQueries(double alpha, double lambda, double eps) {
    const double l = std::log(2.0 / (lambda * eps));
    return std::ceil(alpha / lambda * l * l);
}

FlaggedUnitary inversionPatch(const BlockEncoding& uH, double lambda, double eps, std::optional<double> alphaMax) {
    requireSquareSystem(uH);
    if (!(lambda > 0.0 && lambda <= 1.0)) fail(ErrorKind::OutOfRange, "lambda must lie in (0, 1]");
    if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
    if (uH.epsilon > eps * lambda * lambda / 2.0) {
        fail(ErrorKind::InputTooNoisy, "input error exceeds eps * lambda^2 / 2");
    }
    const double amax = alphaMax.value_or(2.0 / lambda);
    if (amax * lambda < 2.0 - kConstructTol) fail(ErrorKind::OutOfRange, "alphaMax * lambda must be at least 2");
    const ComplexMatrix f = hermitianFunction(uH.extracted(), [lambda](double x) {
        return cplx(patchFunction(x, lambda), 0.0);
    });
    const int q = uH.ancillas + 1;
    const std::size_t n = uH.systemDim;
    const std::size_t half = n << q;
    checkCapacity(2 * half, "inversion patch");
    const ComplexMatrix v = encodeBlock(0.5 * lambda * f, 2.0 / lambda, q, eps, {}).unitary;

    const double s = std::min(1.0, 2.0 / (lambda * amax));
    const double c = std::sqrt(std::max(0.0, 1.0 - s * s));
    ComplexMatrix w = ComplexMatrix::Zero(2 * half, 2 * half);
    w.topLeftCorner(half, half) = v;
    w.bottomRightCorner(half, half) = v;
    // flip F on Q = 0, then rotate F on Q = 0
    ComplexMatrix flip = ComplexMatrix::Identity(2 * half, 2 * half);
    ComplexMatrix rot = ComplexMatrix::Identity(2 * half, 2 * half);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t a = i, b = half + i;
        flip(a, a) = flip(b, b) = 0.0;
        flip(a, b) = flip(b, a) = 1.0;
        rot(a, a) = s;
        rot(a, b) = c;
        rot(b, a) = -c;
        rot(b, b) = s;
    }
    FlaggedUnitary out;
    out.unitary = rot * flip * w;
    out.alphaMax = amax;
    out.qubitsQ = q;
    out.systemDim = n;
    out.epsilon = eps;
    const double queries = patchQueries(uH.alpha, lambda, eps);
    out.ledger = uH.ledger.scaled(queries);
    out.ledger.gates += (uH.ancillas + 1) * queries;
    return out;
}

}  // namespace blockenc

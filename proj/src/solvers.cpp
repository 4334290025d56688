#include "blockenc/solvers.hpp"

#include "blockenc/hamsim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace blockenc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kZeroTol = 1e-10;

struct Prepared {
    BlockEncoding h;
    StateVector input;
    bool wrapped = false;
    std::size_t outDim = 0;
    VSTA vsta;
    std::vector<CostLedger> stages;
};

bool isHermitian(const ComplexMatrix& a) {
    return (a - a.adjoint()).norm() <= 1e-10 * std::max(1.0, a.norm());
}

StateVector unwrap(const StateVector& v, const Prepared& p) {
    if (!p.wrapped) return v;
    return v.tail(static_cast<Eigen::Index>(p.outDim));
}

Prepared prepareInversion(const BlockEncoding& uH, const StateVector& b, const QLSConfig& cfg) {
    cfg.validate();
    if (b.size() == 0 || static_cast<std::size_t>(b.size()) > uH.systemDim) {
        fail(ErrorKind::DimensionMismatch, "right-hand side does not fit the encoding");
    }
    Prepared p;
    p.outDim = uH.systemDim;
    StateVector padded = StateVector::Zero(static_cast<Eigen::Index>(uH.systemDim));
    padded.head(b.size()) = normalized(b);
    const ComplexMatrix ext = uH.extracted();
    if (static_cast<std::size_t>(b.size()) != uH.systemDim || !isHermitian(ext)) {
        if (cfg.power != 1.0) fail(ErrorKind::Precondition, "powers other than 1 need a Hermitian input");
        p.h = complement(uH);
        p.wrapped = true;
        p.input = StateVector::Zero(static_cast<Eigen::Index>(p.h.systemDim));
        p.input.head(padded.size()) = padded;
    } else {
        p.h = uH;
        p.input = padded;
    }
    const double kc = std::pow(cfg.kappa, cfg.power + 1.0);
    const double l = std::log(cfg.kappa / cfg.eps);
    if (p.h.epsilon > cfg.eps / (kc * std::max(1.0, l * l * l))) {
        fail(ErrorKind::InputTooNoisy, "encoding error too large for the requested precision");
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitianPart(p.h.extracted()));
    const RealVector& lam = es.eigenvalues();
    const double tol = p.h.epsilon + kZeroTol;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double a = std::abs(lam(i));
        if (a <= tol) continue;
        if (a < 1.0 / cfg.kappa - tol || a > 1.0 + tol) {
            fail(ErrorKind::SpectrumViolation, "eigenvalue " + std::to_string(lam(i)) + " outside [1/kappa, 1]");
        }
    }
    const int m = cfg.stages;
    VSTA& v = p.vsta;
    v.branchBasis = es.eigenvectors();
    v.stopProbability = Eigen::MatrixXd::Zero(lam.size(), m);
    v.goodAmplitude = Eigen::MatrixXcd::Zero(lam.size(), m);
    double t = 0.0;
    for (int j = 1; j <= m; ++j) {
        p.stages.push_back(qlsStageLedger(p.h, cfg, j));
        t += p.stages.back().totalQueries();
        v.stoppingTimes.push_back(t);
    }
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        const double x = std::abs(lam(i)) <= tol ? 0.0 : std::clamp(lam(i), -1.0, 1.0);
        double cont = 1.0;
        for (int j = 1; j <= m; ++j) {
            const double phi = std::ldexp(1.0, -j);
            const double lambdaEff = std::max(phi, 1.0 / cfg.kappa);
            double stop = cont;
            if (j < m) {
                const GPEBranch g = detail::gpeSplit(x, phi, cfg.epsPrime);
                stop = cont * g.alpha1 * g.alpha1;
            }
            v.stopProbability(i, j - 1) = stop;
            cont -= stop;
            v.goodAmplitude(i, j - 1) = powerPatch(x, lambdaEff, cfg.power) / cfg.alphaMax;
        }
        const double sum = v.stopProbability.row(i).sum();
        v.stopProbability.row(i) /= sum;
    }
    v.validate();
    return p;
}

void checkOverlap(const BlockEncoding& uH, const StateVector& psi, double gammaLower) {
    if (!(gammaLower > 0.0 && gammaLower <= 1.0)) fail(ErrorKind::InvalidArgument, "gamma must lie in (0,1]");
    ComplexMatrix a = uH.extracted();
    if (psi.size() == 0 || psi.size() > a.rows()) fail(ErrorKind::DimensionMismatch, "state does not fit");
    StateVector padded = StateVector::Zero(a.rows());
    padded.head(psi.size()) = normalized(psi);
    auto d = svd(a);
    StateVector proj = StateVector::Zero(a.rows());
    for (Eigen::Index i = 0; i < d.singularValues.size(); ++i)
        if (d.singularValues(i) > uH.epsilon + kZeroTol) {
            proj += d.leftVectors.col(i) * d.leftVectors.col(i).dot(padded);
        }
    const double overlap = proj.squaredNorm();
    if (overlap < gammaLower - 1e-12) {
        fail(ErrorKind::OverlapViolation, "column-space overlap " + std::to_string(overlap) + " below gamma " +
                                              std::to_string(gammaLower));
    }
}

ComplexMatrix referenceOperator(const BlockEncoding& uH) {
    return uH.target ? padSquare(*uH.target) : uH.extracted();
}

NormEstimate normOf(const BlockEncoding& uH, const StateVector& psi, const QLSConfig& cfg, double delta,
                    std::mt19937_64& rng) {
    Prepared p = prepareInversion(uH, psi, cfg);
    const double pLower = 0.5 * cfg.gammaLower / (cfg.alphaMax * cfg.alphaMax);
    MindfulResult r = mindfulAmplify(p.vsta, p.input, cfg.eps / 2.0, delta, pLower, rng);
    NormEstimate out;
    out.gamma = cfg.alphaMax * r.normEstimate;
    out.runQueries = r.vtaa.runCost;
    out.estimationQueries = r.estimationCost + r.vtaa.buildCost;
    ComplexMatrix h = referenceOperator(uH);
    StateVector padded = StateVector::Zero(h.rows());
    padded.head(psi.size()) = normalized(psi);
    if (isHermitian(h)) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
        StateVector c = es.eigenvectors().adjoint() * padded;
        double n2 = 0.0;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            const double l = es.eigenvalues()(i);
            if (std::abs(l) > kZeroTol) n2 += std::norm(c(i)) * std::pow(std::abs(l), -2.0 * cfg.power);
        }
        out.reference = std::sqrt(n2);
    } else {
        out.reference = (pseudoinverse(h) * padded).norm();
    }
    return out;
}

}  // namespace

ComplexMatrix hermitianDilation(const ComplexMatrix& a) {
    const Eigen::Index r = a.rows(), c = a.cols();
    ComplexMatrix out = ComplexMatrix::Zero(r + c, r + c);
    out.topRightCorner(r, c) = a;
    out.bottomLeftCorner(c, r) = a.adjoint();
    return out;
}

void SVEConfig::validate() const {
    if (!(Delta > 0.0 && Delta < 1.0)) fail(ErrorKind::InvalidArgument, "Delta must lie in (0,1)");
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::InvalidArgument, "eps must lie in (0,1)");
    if (T % 2 == 0 || static_cast<double>(T) < 2.0 * kPi / Delta) {
        fail(ErrorKind::InvalidArgument, "T must be odd and at least 2 pi / Delta");
    }
    if (repetitions < 1) fail(ErrorKind::InvalidArgument, "at least one repetition");
}

SVEConfig makeSVEConfig(double Delta, double eps, SVEScale scale) {
    SVEConfig c;
    c.Delta = Delta;
    c.eps = eps;
    c.scale = scale;
    if (!(Delta > 0.0 && Delta < 1.0)) fail(ErrorKind::InvalidArgument, "Delta must lie in (0,1)");
    c.T = static_cast<long>(std::ceil(3.0 * kPi / Delta));
    if (c.T % 2 == 0) ++c.T;
    c.repetitions = medianRepetitions(eps);
    c.validate();
    return c;
}

double dirichletKernel(long n, double x) {
    const double s = std::sin(x / 2.0);
    if (std::abs(s) < 1e-13) return static_cast<double>(2 * n + 1);
    return std::sin((static_cast<double>(n) + 0.5) * x) / s;
}

double SVEResult::estimateOf(long absZ) const {
    const double scale = cfg.scale == SVEScale::TwoPi ? 2.0 * kPi : kPi;
    return scale * static_cast<double>(std::abs(absZ)) / static_cast<double>(cfg.T);
}

double SVEResult::sampleEstimate(std::size_t branch, std::mt19937_64& rng) const {
    if (branch >= branches.size()) fail(ErrorKind::IndexOutOfRange, "branch index");
    const SVEBranch& b = branches[branch];
    std::bernoulli_distribution good(b.beta2);
    std::discrete_distribution<long> z(b.absZ.begin(), b.absZ.end());
    std::vector<long> kept;
    for (int r = 0; r < cfg.repetitions; ++r) {
        const bool g = good(rng);
        const long v = z(rng);
        if (g) kept.push_back(v);
    }
    if (kept.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t mid = (kept.size() - 1) / 2;
    std::nth_element(kept.begin(), kept.begin() + static_cast<long>(mid), kept.end());
    return estimateOf(kept[mid]);
}

SVEResult singularValueEstimation(const BlockEncoding& uA, const StateVector& psi, const SVEConfig& cfg) {
    cfg.validate();
    const double l = std::log2(1.0 / cfg.Delta);
    const double epsPrime = cfg.eps * cfg.Delta / (4.0 * std::max(1.0, l * l));
    if (uA.epsilon > epsPrime) fail(ErrorKind::InputTooNoisy, "encoding error exceeds eps Delta / (4 log^2(1/Delta))");
    const ComplexMatrix a = uA.extracted();
    if (psi.size() != a.rows()) fail(ErrorKind::DimensionMismatch, "state size");
    const StateVector in = normalized(psi);
    auto d = svd(a);
    SVEResult out;
    out.cfg = cfg;
    StateVector residual = in;
    const long n = (cfg.T - 1) / 2;
    const double T = static_cast<double>(cfg.T);
    for (Eigen::Index j = 0; j < d.singularValues.size(); ++j) {
        const double sigma = d.singularValues(j);
        if (sigma <= kZeroTol) continue;
        const cplx c = d.leftVectors.col(j).dot(in);
        residual -= c * d.leftVectors.col(j);
        SVEBranch b;
        b.sigma = sigma;
        b.weight = std::norm(c);
        std::vector<double> amp(static_cast<std::size_t>(2 * n + 1));
        double beta2 = 0.0;
        for (long z = -n; z <= n; ++z) {
            const double x = 2.0 * kPi * static_cast<double>(z) / T;
            const double v = (dirichletKernel(n, x + sigma) + dirichletKernel(n, x - sigma)) / (2.0 * T);
            amp[static_cast<std::size_t>(z + n)] = v * v;
            beta2 += v * v;
        }
        b.beta2 = beta2;
        b.absZ.assign(static_cast<std::size_t>(n + 1), 0.0);
        for (long z = -n; z <= n; ++z) b.absZ[static_cast<std::size_t>(std::abs(z))] += amp[static_cast<std::size_t>(z + n)] / beta2;
        b.zStar = std::min(n, std::lround(T * sigma / (2.0 * kPi)));
        b.peakMass = b.absZ[static_cast<std::size_t>(b.zStar)];
        std::vector<double> cdf(static_cast<std::size_t>(n + 1));
        double acc = 0.0;
        long lo = -1, hi = -2;
        for (long z = 0; z <= n; ++z) {
            acc += b.absZ[static_cast<std::size_t>(z)];
            cdf[static_cast<std::size_t>(z)] = std::min(acc, 1.0);
            if (std::abs(out.estimateOf(z) - sigma) <= cfg.Delta) {
                if (lo < 0) lo = z;
                hi = z;
            }
        }
        if (lo >= 0) {
            const double fHi = cdf[static_cast<std::size_t>(hi)];
            const double fLo = lo > 0 ? cdf[static_cast<std::size_t>(lo - 1)] : 0.0;
            double total = 0.0;
            for (int g = 1; g <= cfg.repetitions; ++g) {
                const double pg = binomialUpperTail(cfg.repetitions, g, beta2) -
                                  binomialUpperTail(cfg.repetitions, g + 1, beta2);
                const int h = (g - 1) / 2 + 1;
                total += pg * (binomialUpperTail(g, h, fHi) - binomialUpperTail(g, h, fLo));
            }
            b.successProbability = std::clamp(total, 0.0, 1.0);
        }
        out.branches.push_back(std::move(b));
    }
    if (residual.norm() > 1e-8) fail(ErrorKind::SpanViolation, "state has weight outside the left singular span");
    BlockEncoding dil;
    dil.alpha = uA.alpha;
    dil.ancillas = 2 * uA.ancillas;
    dil.ledger = uA.ledger.scaled(2.0);
    const std::size_t M = nextPow2(static_cast<std::size_t>(n + 1));
    out.ledger = controlledHamSimCost(dil, M, 1.0, cfg.eps / 2.0).scaled(cfg.repetitions);
    out.ledger.gates += cfg.repetitions * std::pow(ceilLog2(static_cast<std::size_t>(cfg.T)), 2);
    return out;
}

void QLSConfig::validate() const {
    if (!(kappa >= 2.0)) fail(ErrorKind::OutOfRange, "kappa must be at least 2");
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::InvalidArgument, "eps must lie in (0,1)");
    if (stages != static_cast<int>(std::ceil(std::log2(kappa) - 1e-12)) + 1) {
        fail(ErrorKind::InvalidArgument, "stage count inconsistent with kappa");
    }
    if (!(gammaLower > 0.0 && gammaLower <= 1.0)) fail(ErrorKind::InvalidArgument, "gamma must lie in (0,1]");
    if (!(power > 0.0)) fail(ErrorKind::OutOfRange, "power must be positive");
    if (!(delta > 0.0 && delta < 1.0)) fail(ErrorKind::InvalidArgument, "delta must lie in (0,1)");
}

QLSConfig makeQLSConfig(double kappa, double eps, double gammaLower, double power) {
    if (!(kappa >= 2.0)) fail(ErrorKind::OutOfRange, "kappa must be at least 2");
    if (!(power > 0.0)) fail(ErrorKind::OutOfRange, "power must be positive");
    QLSConfig c;
    c.kappa = kappa;
    c.eps = eps;
    c.gammaLower = gammaLower;
    c.power = power;
    c.stages = static_cast<int>(std::ceil(std::log2(kappa) - 1e-12)) + 1;
    c.alphaMax = 2.0 * std::pow(kappa, power);
    c.epsPrime = eps / (c.stages * c.alphaMax * std::max(1.0, power));
    c.validate();
    return c;
}

double powerPatch(double x, double lambda, double c) {
    if (std::abs(x) >= lambda) return (x < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(x), -c);
    return x * std::pow(lambda, -c - 1.0);
}

CostLedger qlsStageLedger(const BlockEncoding& uH, const QLSConfig& cfg, int j) {
    if (j < 1 || j > cfg.stages) fail(ErrorKind::IndexOutOfRange, "stage index");
    const double phi = std::ldexp(1.0, -j);
    const double lambdaEff = std::max(phi, 1.0 / cfg.kappa);
    CostLedger l = gpeCost(uH, phi, cfg.epsPrime);
    const double q = std::max(1.0, cfg.power) * patchQueries(uH.alpha, lambdaEff, cfg.epsPrime);
    CostLedger patch = uH.ledger.scaled(q);
    patch.gates += (uH.ancillas + 2) * q;
    return l + patch;
}

QLSResult qlsSolve(const BlockEncoding& uH, const StateVector& b, const QLSConfig& cfg) {
    Prepared p = prepareInversion(uH, b, cfg);
    QLSResult out;
    out.cfg = cfg;
    out.wrapped = p.wrapped;
    const double pLower = 0.5 * cfg.gammaLower / (cfg.alphaMax * cfg.alphaMax);
    out.vtaa = buildVTAA(p.vsta, p.input, pLower, cfg.delta);
    const auto& q = out.vtaa.schedule.multiplier;
    double mult = 1.0;
    for (int j = cfg.stages; j >= 1; --j) {
        mult *= q[static_cast<std::size_t>(j - 1)];
        out.ledger += p.stages[static_cast<std::size_t>(j - 1)].scaled(mult + 1.0);
    }
    out.ledger.queries["state-prep"] += out.vtaa.preparations;
    out.buildQueries = out.vtaa.buildCost;
    StateVector merged = unwrap(mergedGoodState(p.vsta, out.vtaa.state), p);
    if (merged.norm() <= 1e-300) fail(ErrorKind::ZeroVector, "no inverted component");
    out.state = normalized(merged);
    out.vsta = std::move(p.vsta);
    return out;
}

StateVector directSolve(const ComplexMatrix& h, const StateVector& b, double power) {
    if (b.size() > h.rows()) fail(ErrorKind::DimensionMismatch, "state size");
    StateVector padded = StateVector::Zero(h.rows());
    padded.head(b.size()) = b;
    if (h.rows() == h.cols() && isHermitian(h)) {
        Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
        StateVector c = es.eigenvectors().adjoint() * padded;
        for (Eigen::Index i = 0; i < c.size(); ++i) {
            const double l = es.eigenvalues()(i);
            c(i) *= std::abs(l) > kZeroTol ? (l < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(l), -power) : 0.0;
        }
        return normalized(es.eigenvectors() * c);
    }
    if (power != 1.0) fail(ErrorKind::Precondition, "powers other than 1 need a Hermitian input");
    return normalized(pseudoinverse(h) * padded);
}

QLSResult pseudoinverseState(const BlockEncoding& uH, const StateVector& psi, double kappa, double gammaLower,
                             double eps) {
    checkOverlap(uH, psi, gammaLower);
    return qlsSolve(uH, psi, makeQLSConfig(kappa, eps, gammaLower));
}

NormEstimate qlsNormEstimate(const BlockEncoding& uH, const StateVector& psi, double kappa, double gammaLower,
                             double eps, double delta, std::mt19937_64& rng) {
    checkOverlap(uH, psi, gammaLower);
    return normOf(uH, psi, makeQLSConfig(kappa, eps, gammaLower), delta, rng);
}

QLSResult negativePowerSolve(const BlockEncoding& uH, const StateVector& psi, double c, double kappa, double eps) {
    return qlsSolve(uH, psi, makeQLSConfig(kappa, eps, 1.0, c));
}

NormEstimate negativePowerNorm(const BlockEncoding& uH, const StateVector& psi, double c, double kappa, double eps,
                               double delta, std::mt19937_64& rng) {
    return normOf(uH, psi, makeQLSConfig(kappa, eps, 1.0, c), delta, rng);
}

DataStructureSolve qlsFromDataStructure(const KPTree& treeA, const KPTree& treeB, MuMode mode, double p,
                                        double kappa, double eps) {
    if (treeB.rows() != 1 && treeB.cols() != 1) fail(ErrorKind::DimensionMismatch, "b must be a vector tree");
    const StateVector b = vectorState(treeB);
    if (static_cast<std::size_t>(b.size()) != treeA.rows()) fail(ErrorKind::DimensionMismatch, "b length");
    DataStructureSolve out;
    BlockEncoding u;
    if (mode == MuMode::Frobenius) {
        out.mu = muOf(treeA);
        u = fromKP({&treeA, nullptr, nullptr}, out.mu, 0.0);
    } else {
        auto [pw, comp] = powerTrees(treeA.matrix(), p);
        out.mu = muOf(&pw, &comp, p);
        u = fromKP({&treeA, &pw, &comp}, out.mu, 0.0);
    }
    out.qls = qlsSolve(u, b, makeQLSConfig(kappa, eps));
    out.state = normalized(out.qls.state.tail(static_cast<Eigen::Index>(treeA.cols())));
    return out;
}

AppliedState naiveInverseState(const BlockEncoding& uH, const StateVector& b, double kappa, double eps) {
    BlockEncoding inv = negativePower(uH, 1.0, kappa, eps / 2.0);
    inv.alpha /= kappa;
    inv.epsilon /= kappa;
    if (inv.target) *inv.target /= kappa;
    return applyToState(inv, b, 1.0 / kappa, eps);
}

std::string solverReport(const std::string& digest, double fidelity, double estimate, double reference,
                         const CostLedger& ledger) {
    nlohmann::json j;
    j["digest"] = digest;
    j["fidelity"] = fidelity;
    j["estimate"] = estimate;
    j["reference"] = reference;
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [k, v] : ledger.queries) q[k] = v;
    j["ledger"] = {{"queries", q}, {"gates", ledger.gates}, {"total", ledger.totalQueries()}};
    return j.dump(2);
}

}  // namespace blockenc

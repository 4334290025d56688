#include "blockenc/variable_time.hpp"

#include "blockenc/hamsim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace blockenc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kProbTol = 1e-9;

void requireUnit(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) fail(ErrorKind::InvalidArgument, std::string(name) + " must lie in (0,1)");
}

// |sum_y e^{2 pi i y x}|^2 / M^2 for y in [0, M).
double fejer(std::size_t M, double x) {
    const double s = std::sin(kPi * x);
    if (std::abs(s) < 1e-14) return 1.0;
    const double n = std::sin(kPi * static_cast<double>(M) * x);
    return n * n / (static_cast<double>(M * M) * s * s);
}

std::vector<double> aeOutcomeDistribution(double amplitude, std::size_t M) {
    const double theta = std::asin(std::clamp(amplitude, 0.0, 1.0)) / kPi;
    std::vector<double> p(M);
    for (std::size_t y = 0; y < M; ++y) {
        const double f = static_cast<double>(y) / static_cast<double>(M);
        p[y] = 0.5 * (fejer(M, f - theta) + fejer(M, f + theta));
    }
    return p;
}

std::size_t gpePoints(double phi) {
    return nextPow2(static_cast<std::size_t>(std::ceil(24.0 * kPi / phi)));
}

int gpeRepetitions(double eps) {
    int r = static_cast<int>(std::ceil(std::log(1.0 / (eps * eps)) / (2.0 * 0.34 * 0.34)));
    r = std::max(r, 1);
    return r % 2 == 0 ? r + 1 : r;
}

}  // namespace

double aaAmplitude(double alpha, int k) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidArgument, "amplitude must lie in [0,1]");
    if (k < 0) fail(ErrorKind::InvalidArgument, "k must be non-negative");
    return std::sin((2.0 * k + 1.0) * std::asin(alpha));
}

double aaLowerBound(double alpha, int k) {
    const double x = (2.0 * k + 1.0) * alpha;
    return x * std::sqrt(std::max(0.0, 1.0 - x * x / 3.0));
}

StateVector aaAmplify(const StateVector& s, const ComplexMatrix& projector, int k) {
    if (k < 0) fail(ErrorKind::InvalidArgument, "k must be non-negative");
    if (projector.rows() != s.size() || projector.cols() != s.size()) {
        fail(ErrorKind::DimensionMismatch, "projector does not match the state");
    }
    if (std::abs(s.norm() - 1.0) > kProbTol) fail(ErrorKind::InvalidArgument, "state must be normalized");
    StateVector v = s;
    for (int i = 0; i < k; ++i) {
        v -= 2.0 * (projector * v);
        v = -(v - 2.0 * s * s.dot(v));
    }
    return v;
}

RatioCheck amplificationRatioCheck(double alpha, int k) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) fail(ErrorKind::InvalidArgument, "amplitude must lie in [0,1]");
    if (k < 0) fail(ErrorKind::InvalidArgument, "k must be non-negative");
    const double angle = (2.0 * k + 1.0) * std::asin(alpha);
    if (angle > kPi / 2.0 + 1e-12) {
        fail(ErrorKind::OverAmplification, "(2k+1) arcsin(alpha) exceeds pi/2");
    }
    RatioCheck r;
    const double s = std::sin(angle);
    r.ratio = alpha == 0.0 ? 1.0 : (2.0 * k + 1.0) * alpha / s;
    r.bound = 1.0 + 1.5 * s * s;
    r.holds = r.ratio <= r.bound + 1e-12;
    return r;
}

int medianRepetitions(double delta) {
    if (!(delta > 0.0)) fail(ErrorKind::InvalidArgument, "delta must be positive");
    if (delta >= 1.0) return 1;
    return 2 * static_cast<int>(std::ceil(18.0 * std::log(1.0 / delta))) + 1;
}

AmplitudeEstimate amplitudeEstimateWithPoints(double amplitude, int points, double delta, double runCost,
                                              std::mt19937_64& rng) {
    if (!(amplitude >= 0.0 && amplitude <= 1.0 + kProbTol)) {
        fail(ErrorKind::InvalidArgument, "amplitude must lie in [0,1]");
    }
    if (points < 1 || (points & (points - 1)) != 0) fail(ErrorKind::NotPowerOfTwo, "points must be a power of two");
    const auto M = static_cast<std::size_t>(points);
    const auto p = aeOutcomeDistribution(amplitude, M);
    std::discrete_distribution<std::size_t> dist(p.begin(), p.end());
    AmplitudeEstimate out;
    out.points = points;
    out.repetitions = medianRepetitions(delta);
    std::vector<double> samples(out.repetitions);
    for (auto& v : samples) v = std::sin(kPi * static_cast<double>(dist(rng)) / static_cast<double>(M));
    std::nth_element(samples.begin(), samples.begin() + out.repetitions / 2, samples.end());
    out.estimate = samples[out.repetitions / 2];
    out.cost = static_cast<double>(out.repetitions) * points * runCost;
    return out;
}

AmplitudeEstimate amplitudeEstimate(double amplitude, int j, double delta, double runCost, std::mt19937_64& rng) {
    if (j < 0 || j > 24) fail(ErrorKind::InvalidArgument, "resolution out of range");
    auto out = amplitudeEstimateWithPoints(amplitude, 1 << (j + 2), delta, runCost, rng);
    out.threshold = std::ldexp(1.0, -j);
    out.belowThreshold = out.estimate < out.threshold;
    return out;
}

namespace detail {

GPEBranch gpeSplit(double lambda, double phi, double eps) {
    if (!(phi > 0.0)) fail(ErrorKind::PhiOutOfRange, "phi must be positive");
    requireUnit(eps, "eps");
    if (std::abs(lambda) > 1.0 + kConstructTol) fail(ErrorKind::OutOfRange, "eigenphase outside [-1,1]");
    GPEBranch g;
    const std::size_t M = gpePoints(phi);
    g.points = static_cast<int>(M);
    g.repetitions = gpeRepetitions(eps);
    g.registerQubits = g.repetitions * ceilLog2(M);
    double p1 = 0.0;
    for (std::size_t y = 0; y < M; ++y) {
        const double signedY = y >= M / 2 ? static_cast<double>(y) - static_cast<double>(M) : static_cast<double>(y);
        const double est = 2.0 * kPi * signedY / static_cast<double>(M);
        if (std::abs(est) < 1.5 * phi) continue;
        p1 += fejer(M, (lambda - est) / (2.0 * kPi));
    }
    p1 = std::clamp(p1, 0.0, 1.0);
    const int half = (g.repetitions + 1) / 2;
    const double up = binomialUpperTail(g.repetitions, half, p1);
    const double down = binomialUpperTail(g.repetitions, half, 1.0 - p1);
    g.alpha1 = std::sqrt(up / (up + down));
    g.alpha0 = std::sqrt(down / (up + down));
    return g;
}

}  // namespace detail

GPEBranch gappedPhaseEstimation(double lambda, double phi, double eps) {
    if (!(phi > 0.0 && phi <= 0.25)) fail(ErrorKind::PhiOutOfRange, "phi must lie in (0, 1/4]");
    return detail::gpeSplit(lambda, phi, eps);
}

CostLedger gpeCost(const BlockEncoding& uH, double phi, double eps) {
    if (!(phi > 0.0)) fail(ErrorKind::PhiOutOfRange, "phi must be positive");
    requireUnit(eps, "eps");
    const std::size_t M = gpePoints(phi);
    const int R = gpeRepetitions(eps);
    CostLedger l = controlledHamSimCost(uH, M / 2, 1.0, eps / (2.0 * R)).scaled(R);
    l.gates += R * std::pow(ceilLog2(M), 2);
    return l;
}

void VariableStoppingTimeAlgorithm::validate() const {
    const auto m = static_cast<Eigen::Index>(stages());
    if (m == 0) fail(ErrorKind::EmptyList, "no stages");
    if (!(stoppingTimes.front() > 0.0)) fail(ErrorKind::InvalidArgument, "first stopping time must be positive");
    for (std::size_t j = 1; j < stoppingTimes.size(); ++j)
        if (!(stoppingTimes[j] > stoppingTimes[j - 1])) {
            fail(ErrorKind::InvalidArgument, "stopping times must be strictly increasing");
        }
    const Eigen::Index b = branchBasis.cols();
    if (b == 0 || branchBasis.rows() < b) fail(ErrorKind::DimensionMismatch, "bad branch basis shape");
    if ((branchBasis.adjoint() * branchBasis - ComplexMatrix::Identity(b, b)).norm() > kProbTol) {
        fail(ErrorKind::InvalidArgument, "branch basis is not orthonormal");
    }
    if (stopProbability.rows() != b || stopProbability.cols() != m || goodAmplitude.rows() != b ||
        goodAmplitude.cols() != m) {
        fail(ErrorKind::DimensionMismatch, "stage tables must be branches x stages");
    }
    for (Eigen::Index i = 0; i < b; ++i) {
        if ((stopProbability.row(i).array() < -kProbTol).any()) fail(ErrorKind::InvalidArgument, "negative probability");
        if (std::abs(stopProbability.row(i).sum() - 1.0) > kProbTol) {
            fail(ErrorKind::InvalidArgument, "every branch must stop by the last stage");
        }
        if ((goodAmplitude.row(i).array().abs() > 1.0 + kProbTol).any()) {
            fail(ErrorKind::InvalidArgument, "good amplitude exceeds 1");
        }
    }
}

VSTA toyVSTA(const std::vector<double>& times, const std::vector<double>& pGood, const std::vector<double>& pBad) {
    if (times.size() != pGood.size() || times.size() != pBad.size()) {
        fail(ErrorKind::DimensionMismatch, "stage lists differ in length");
    }
    const auto m = static_cast<Eigen::Index>(times.size());
    VSTA v;
    v.stoppingTimes = times;
    v.branchBasis = ComplexMatrix::Identity(1, 1);
    v.stopProbability.resize(1, m);
    v.goodAmplitude.resize(1, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double s = pGood[j] + pBad[j];
        v.stopProbability(0, j) = s;
        v.goodAmplitude(0, j) = s > 0.0 ? std::sqrt(pGood[j] / s) : 0.0;
    }
    v.validate();
    return v;
}

double BranchState::maybeGoodNorm() const { return std::sqrt(good.squaredNorm() + cont.squaredNorm()); }
double BranchState::goodNorm() const { return good.norm(); }
double BranchState::totalNorm() const {
    return std::sqrt(good.squaredNorm() + bad.squaredNorm() + cont.squaredNorm());
}

BranchState initialBranchState(const VSTA& vsta, const StateVector& input) {
    vsta.validate();
    if (input.size() != vsta.branchBasis.rows()) fail(ErrorKind::DimensionMismatch, "input dimension mismatch");
    if (std::abs(input.norm() - 1.0) > kProbTol) fail(ErrorKind::InvalidArgument, "input must be normalized");
    StateVector c = vsta.branchBasis.adjoint() * input;
    if ((input - vsta.branchBasis * c).norm() > 1e-9) {
        fail(ErrorKind::SpanViolation, "input leaves the branch span");
    }
    const auto b = static_cast<Eigen::Index>(vsta.branches());
    const auto m = static_cast<Eigen::Index>(vsta.stages());
    BranchState s;
    s.good = Eigen::MatrixXcd::Zero(b, m);
    s.bad = Eigen::MatrixXd::Zero(b, m);
    s.cont = c;
    return s;
}

void applyStage(const VSTA& vsta, BranchState& state) {
    const std::size_t m = vsta.stages();
    if (state.stagesApplied >= m) fail(ErrorKind::Precondition, "all stages already applied");
    const auto j = static_cast<Eigen::Index>(state.stagesApplied);
    for (Eigen::Index i = 0; i < state.cont.size(); ++i) {
        const double remaining = 1.0 - vsta.stopProbability.row(i).head(j).sum();
        double sigma = remaining > 1e-300 ? vsta.stopProbability(i, j) / remaining : 1.0;
        if (state.stagesApplied + 1 == m) sigma = 1.0;
        sigma = std::clamp(sigma, 0.0, 1.0);
        const cplx x = state.cont(i);
        const cplx g = vsta.goodAmplitude(i, j);
        state.good(i, j) = x * std::sqrt(sigma) * g;
        state.bad(i, j) = std::abs(x) * std::sqrt(sigma) * std::sqrt(std::max(0.0, 1.0 - std::norm(g)));
        state.cont(i) = x * std::sqrt(1.0 - sigma);
    }
    ++state.stagesApplied;
}

void amplifyMaybeGood(BranchState& state, int k) {
    if (k < 0) fail(ErrorKind::InvalidArgument, "k must be non-negative");
    if (k == 0) return;
    const double total = state.totalNorm();
    const double p = std::min(state.maybeGoodNorm() / total, 1.0);
    if (p == 0.0) fail(ErrorKind::Precondition, "nothing to amplify");
    const double theta = std::asin(p);
    const double angle = (2.0 * k + 1.0) * theta;
    const double sg = std::sin(angle) / std::sin(theta);
    const double cb = std::cos(theta) > 1e-15 ? std::cos(angle) / std::cos(theta) : 0.0;
    state.good *= sg;
    state.cont *= sg;
    state.bad *= cb;
}

StoppingProfile stoppingProfile(const VSTA& vsta, const StateVector& input) {
    BranchState s = initialBranchState(vsta, input);
    StoppingProfile out;
    double t2 = 0.0;
    for (std::size_t j = 0; j < vsta.stages(); ++j) {
        applyStage(vsta, s);
        const auto jj = static_cast<Eigen::Index>(j);
        const double p = s.good.col(jj).squaredNorm() + s.bad.col(jj).squaredNorm();
        out.pStopAt.push_back(p);
        out.pMaybeGood.push_back(s.maybeGoodNorm() * s.maybeGoodNorm());
        t2 += p * vsta.stoppingTimes[j] * vsta.stoppingTimes[j];
    }
    out.pSucc = out.pMaybeGood.back();
    out.tNorm2 = std::sqrt(t2);
    return out;
}

std::string StoppingProfile::json() const {
    nlohmann::json j;
    j["pStopAt"] = pStopAt;
    j["pMaybeGood"] = pMaybeGood;
    j["pSucc"] = pSucc;
    j["tNorm2"] = tNorm2;
    return j.dump();
}

bool AmplificationSchedule::empty() const {
    return std::all_of(steps.begin(), steps.end(), [](int k) { return k == 0; });
}

std::string AmplificationSchedule::json() const {
    nlohmann::json j;
    j["steps"] = steps;
    j["preAmplitude"] = preAmplitude;
    j["postAmplitude"] = postAmplitude;
    j["target"] = target;
    j["amplification"] = amplification;
    j["multiplier"] = multiplier;
    j["overhead"] = overhead;
    j["notes"] = notes;
    j["E"] = E;
    j["G"] = G;
    j["O"] = O;
    j["C"] = C;
    return j.dump();
}

double stageTarget(std::size_t j, std::size_t m) {
    if (j < 1 || j > m) fail(ErrorKind::IndexOutOfRange, "stage index out of range");
    const double l = static_cast<double>(m - j + 1);
    return std::max(1.0 / std::sqrt(static_cast<double>(m)), 1.0 / (std::sqrt(l) * (1.0 + std::log(l))));
}

VTAAResult buildVTAA(const VSTA& vsta, const StateVector& input, double pSuccLower, double delta) {
    if (!(pSuccLower > 0.0 && pSuccLower <= 1.0)) fail(ErrorKind::InvalidArgument, "pSuccLower must lie in (0,1]");
    requireUnit(delta, "delta");
    VTAAResult r;
    r.profile = stoppingProfile(vsta, input);
    if (r.profile.pSucc < pSuccLower) {
        fail(ErrorKind::SuccessBound, "success probability " + std::to_string(r.profile.pSucc) + " below bound");
    }
    const std::size_t m = vsta.stages();
    const double logTerm = std::ceil(std::log2(1.0 / pSuccLower));
    const int reps = medianRepetitions(delta / (static_cast<double>(m) + logTerm));
    auto& sch = r.schedule;
    r.state = initialBranchState(vsta, input);
    double cost = 0.0, prevT = 0.0;
    std::vector<double> post{1.0};
    for (std::size_t j = 1; j <= m; ++j) {
        applyStage(vsta, r.state);
        const double segment = cost + vsta.stoppingTimes[j - 1] - prevT;
        const double x = r.state.maybeGoodNorm();
        const double target = stageTarget(j, m);
        int k = 0;
        if (x < target / 2.0) {
            const double theta = std::asin(x);
            if (!(theta > 1e-9)) fail(ErrorKind::Precondition, "maybe-good amplitude too small to amplify");
            k = std::max(0, static_cast<int>(std::floor((std::asin(target / 2.0) / theta - 1.0) / 2.0)) - 1);
            while (std::sin((2.0 * k + 1.0) * theta) < target / 2.0) ++k;
            r.buildCost += reps * std::exp2(std::ceil(std::log2(2.0 * kPi / x))) * segment;
        } else {
            r.buildCost += reps * 4.0 * segment;
        }
        amplifyMaybeGood(r.state, k);
        const double y = r.state.maybeGoodNorm();
        if (k > 0 && y > target + 1e-12) sch.notes.push_back("stage " + std::to_string(j) + " above target");
        const double q = 2.0 * k + 1.0;
        sch.steps.push_back(k);
        sch.preAmplitude.push_back(x);
        sch.postAmplitude.push_back(y);
        sch.target.push_back(target);
        sch.amplification.push_back(y / x);
        sch.multiplier.push_back(q);
        sch.overhead.push_back(q * x / y);
        cost = q * segment;
        if (k > 0) sch.G = std::max(sch.G, 2.0 * k / (vsta.stoppingTimes[j - 1] - prevT));
        sch.C = std::max(sch.C, y * y / (target * target));
        prevT = vsta.stoppingTimes[j - 1];
        post.push_back(y);
        r.preparations *= q;
    }
    for (std::size_t j = 1; j <= m; ++j) sch.E = std::max(sch.E, post[m] / post[j - 1]);
    for (double o : sch.overhead) sch.O *= o;
    r.runCost = cost;
    return r;
}

double vtaaCostBound(const VTAAResult& r, const VSTA& vsta) {
    const double t1 = vsta.stoppingTimes.front();
    const double tMax = vsta.stoppingTimes.back();
    const double i = t1 + r.profile.tNorm2 * std::sqrt(std::log(tMax / t1));
    return r.schedule.E * r.schedule.O * (tMax + i / std::sqrt(r.profile.pSucc));
}

StateVector goodComponent(const BranchState& state) {
    return Eigen::Map<const StateVector>(state.good.data(), state.good.size());
}

StateVector originalGoodComponent(const VSTA& vsta, const StateVector& input) {
    BranchState s = initialBranchState(vsta, input);
    for (std::size_t j = 0; j < vsta.stages(); ++j) applyStage(vsta, s);
    return goodComponent(s);
}

StateVector mergedGoodState(const VSTA& vsta, const BranchState& state) {
    StateVector merged = StateVector::Zero(state.good.rows());
    for (Eigen::Index i = 0; i < state.good.rows(); ++i)
        for (Eigen::Index j = 0; j < state.good.cols(); ++j)
            merged(i) += state.good(i, j) * std::sqrt(std::max(0.0, vsta.stopProbability(i, j)));
    return vsta.branchBasis * merged;
}

VSTA sparsify(const VSTA& vsta) {
    vsta.validate();
    const double t1 = vsta.stoppingTimes.front();
    const double tMax = vsta.stoppingTimes.back();
    const int mt = std::max(1, static_cast<int>(std::ceil(std::log2(2.0 * tMax / t1))));
    std::vector<double> grid;
    for (int j = 0; j <= mt; ++j) {
        const double edge = std::ldexp(t1, j) * (1.0 + 1e-12);
        double best = t1;
        for (double t : vsta.stoppingTimes)
            if (t <= edge) best = t;
        grid.push_back(best);
    }
    std::vector<int> group(vsta.stages());
    std::vector<double> times;
    for (std::size_t i = 0; i < vsta.stages(); ++i) {
        int j = 0;
        while (vsta.stoppingTimes[i] > grid[j]) ++j;
        const double t = grid[j];
        if (times.empty() || times.back() != t) times.push_back(t);
        group[i] = static_cast<int>(times.size()) - 1;
    }
    const auto b = static_cast<Eigen::Index>(vsta.branches());
    const auto n = static_cast<Eigen::Index>(times.size());
    VSTA out;
    out.stoppingTimes = times;
    out.branchBasis = vsta.branchBasis;
    out.stopProbability = Eigen::MatrixXd::Zero(b, n);
    Eigen::MatrixXd goodWeight = Eigen::MatrixXd::Zero(b, n);
    Eigen::MatrixXcd payload = Eigen::MatrixXcd::Zero(b, n);
    for (Eigen::Index i = 0; i < b; ++i)
        for (std::size_t k = 0; k < vsta.stages(); ++k) {
            const double s = vsta.stopProbability(i, k);
            out.stopProbability(i, group[k]) += s;
            goodWeight(i, group[k]) += s * std::norm(vsta.goodAmplitude(i, k));
            payload(i, group[k]) += s * vsta.goodAmplitude(i, k);
        }
    out.goodAmplitude = Eigen::MatrixXcd::Zero(b, n);
    for (Eigen::Index i = 0; i < b; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = out.stopProbability(i, j);
            if (s <= 0.0) continue;
            const double mag = std::sqrt(goodWeight(i, j) / s);
            const cplx p = payload(i, j);
            out.goodAmplitude(i, j) = std::abs(p) > 0.0 ? mag * p / std::abs(p) : cplx(mag, 0.0);
        }
    out.validate();
    return out;
}

MindfulResult mindfulAmplify(const VSTA& vsta, const StateVector& input, double eps, double delta,
                             double pSuccLower, std::mt19937_64& rng) {
    requireUnit(eps, "eps");
    requireUnit(delta, "delta");
    MindfulResult out;
    out.vtaa = buildVTAA(vsta, input, pSuccLower, delta / 2.0);
    const auto& sch = out.vtaa.schedule;
    const std::size_t m = vsta.stages();
    const auto amplified = std::count_if(sch.steps.begin(), sch.steps.end(), [](int k) { return k > 0; });
    const double perEstimate = delta / (2.0 * (2.0 * static_cast<double>(amplified) + 1.0));
    auto pointsFor = [](double precision, double a) {
        const double want = std::ceil(kPi / (precision * a));
        return static_cast<int>(nextPow2(static_cast<std::size_t>(std::max(want, 4.0))));
    };
    double cost = 0.0, prevT = 0.0;
    const double stagePrecision = eps / (5.0 * static_cast<double>(m));
    for (std::size_t j = 0; j < m; ++j) {
        const double segment = cost + vsta.stoppingTimes[j] - prevT;
        const double q = sch.multiplier[j];
        if (sch.steps[j] > 0) {
            const double x = sch.preAmplitude[j], y = sch.postAmplitude[j];
            auto den = amplitudeEstimateWithPoints(x, pointsFor(stagePrecision, x), perEstimate, segment, rng);
            auto num = amplitudeEstimateWithPoints(std::min(y, 1.0), pointsFor(stagePrecision, y), perEstimate,
                                                   q * segment, rng);
            out.gamma *= num.estimate / den.estimate;
            out.estimationCost += den.cost + num.cost;
        }
        out.exactGain *= sch.amplification[j];
        cost = q * segment;
        prevT = vsta.stoppingTimes[j];
    }
    const double finalAmp = out.vtaa.state.goodNorm();
    auto fin = amplitudeEstimateWithPoints(std::min(finalAmp, 1.0), pointsFor(eps / 3.0, finalAmp), perEstimate,
                                           out.vtaa.runCost, rng);
    out.estimationCost += fin.cost;
    out.amplitudeEstimate = fin.estimate;
    out.normEstimate = fin.estimate / out.gamma;
    return out;
}

}  // namespace blockenc

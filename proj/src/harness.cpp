#include "blockenc/harness.hpp"
#include "blockenc/hamsim.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <thread>

namespace blockenc {

namespace {

constexpr const char* kTaskNames[] = {"encode", "hamsim", "sve", "qls", "power", "wls", "gls", "network"};

ComplexMatrix diagonal(std::initializer_list<double> d) {
    Eigen::VectorXd v(d.size());
    int k = 0;
    for (double x : d) v(k++) = x;
    return v.cast<cplx>().asDiagonal();
}

Eigen::MatrixXd realOf(const ComplexMatrix& a, const char* what) {
    if (a.imag().cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::InvalidArgument, std::string(what) + " must be real");
    return a.real();
}

StateVector vectorOf(const ComplexMatrix& a) {
    if (a.cols() == 1) return a.col(0);
    if (a.rows() == 1) return a.row(0).transpose();
    fail(ErrorKind::DimensionMismatch, "vector input must have one row or column");
}

const std::string* input(const ExperimentConfig& cfg, const char* role) {
    auto it = cfg.inputs.find(role);
    return it == cfg.inputs.end() ? nullptr : &it->second;
}

double relErr(double est, double ref) {
    return std::abs(est - ref) / std::max(std::abs(ref), 1e-300);
}

std::string hexDigest(const std::string& text) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        fail(ErrorKind::Numerical, "digest failed");
    }
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

// Smallest power of two above the condition number of a, so kappa checks have headroom.
double kappaFor(const ComplexMatrix& a) {
    const RealVector s = svd(a).singularValues;
    double lo = s.maxCoeff();
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-12) lo = std::min(lo, s(i));
    return std::max(2.0, std::exp2(std::ceil(std::log2(s.maxCoeff() / lo * 1.0001))));
}

RunReport base(const ExperimentConfig& cfg, std::string instance) {
    RunReport r;
    r.task = taskName(cfg.task);
    r.digest = cfg.digest();
    r.instance = std::move(instance);
    r.seed = cfg.seed;
    return r;
}

std::string instanceName(const ExperimentConfig& cfg, const char* dflt) {
    if (!cfg.inputs.empty()) {
        std::string s;
        for (const auto& [k, v] : cfg.inputs) s += (s.empty() ? "" : ",") + std::filesystem::path(v).filename().string();
        return s;
    }
    return cfg.fixture.empty() ? dflt : cfg.fixture;
}

// ---- encode

double classicalMu(const Eigen::MatrixXd& a, MuMode mode, double p) {
    if (mode == MuMode::Frobenius) return a.norm();
    double rows = 0.0, cols = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) rows = std::max(rows, a.row(i).cwiseAbs().array().pow(2 * p).sum());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != 0.0) s += std::pow(std::abs(a(i, j)), 2 * (1 - p));
        cols = std::max(cols, s);
    }
    return std::sqrt(rows * cols);
}

RunReport runEncode(const ExperimentConfig& cfg) {
    Eigen::MatrixXd a;
    if (auto m = input(cfg, "matrix")) {
        a = realOf(readMatrixMarket(*m), "matrix");
    } else {
        a.resize(2, 3);
        a << 0.5, 0.25, 0.0, 0.0, -0.5, 0.1;
    }
    const double eps = cfg.epsilon.value_or(1e-9);
    const double p = cfg.p.value_or(0.5);
    KPTree tree = KPTree::fromMatrix(a);
    BlockEncoding u;
    if (cfg.muMode == MuMode::Frobenius) {
        u = fromKP({&tree, nullptr, nullptr}, muOf(tree), eps);
    } else {
        auto [pw, comp] = powerTrees(a, p);
        u = fromKP({nullptr, &pw, &comp}, muOf(&pw, &comp, p), eps);
    }
    const ComplexMatrix ac = a.cast<cplx>();
    ComplexMatrix dil = ComplexMatrix::Zero(a.rows() + a.cols(), a.rows() + a.cols());
    dil.topRightCorner(a.rows(), a.cols()) = ac;
    dil.bottomLeftCorner(a.cols(), a.rows()) = ac.adjoint();
    RunReport r = base(cfg, instanceName(cfg, "rect2x3"));
    r.estimate = u.alpha;
    r.reference = classicalMu(a, cfg.muMode, p);
    r.relativeError = relErr(r.estimate, r.reference);
    r.fidelity = 1.0 - std::min(1.0, spectralNorm(u.extracted() - dil) / std::max(spectralNorm(dil), 1e-300));
    r.epsilon = eps;
    r.ledger = u.ledger;
    return r;
}

// ---- hamsim

RunReport runHamSim(const ExperimentConfig& cfg) {
    ComplexMatrix h;
    if (auto m = input(cfg, "matrix")) {
        h = readMatrixMarket(*m);
    } else {
        h.resize(2, 2);
        h << 0.3, 0.5, 0.5, -0.2;
    }
    StateVector b = StateVector::Ones(h.rows());
    if (auto v = input(cfg, "vector")) b = vectorOf(readMatrixMarket(*v));
    b = normalized(b);
    const double t = cfg.time.value_or(1.0), eps = cfg.epsilon.value_or(1e-6);
    const double alpha = std::max(spectralNorm(h), 1e-12);
    BlockEncoding u = blockHamSim(exactEncode(h, alpha), t, eps);
    const StateVector out = u.extracted() * b;
    const StateVector ref = hermitianExp(h, t) * b;
    RunReport r = base(cfg, instanceName(cfg, "pauli2"));
    r.estimate = out.norm();
    r.reference = ref.norm();
    r.relativeError = relErr(r.estimate, r.reference);
    r.fidelity = fidelity(normalized(out), normalized(ref));
    r.epsilon = eps;
    r.ledger = u.ledger;
    return r;
}

// ---- sve

RunReport runSVE(const ExperimentConfig& cfg) {
    ComplexMatrix a = diagonal({0.5});
    if (auto m = input(cfg, "matrix")) a = readMatrixMarket(*m);
    StateVector psi = StateVector::Ones(a.cols());
    if (auto v = input(cfg, "vector")) psi = vectorOf(readMatrixMarket(*v));
    psi = normalized(psi);
    const double Delta = cfg.Delta.value_or(0.05), eps = cfg.epsilon.value_or(0.1);
    SVEResult res = singularValueEstimation(exactEncode(a, 1.0), psi, makeSVEConfig(Delta, eps));
    std::size_t best = 0;
    for (std::size_t i = 1; i < res.branches.size(); ++i)
        if (res.branches[i].weight > res.branches[best].weight) best = i;
    std::mt19937_64 rng(cfg.seed);
    const RealVector s = svd(a).singularValues;
    double ref = s(0);
    for (Eigen::Index i = 1; i < s.size(); ++i)
        if (std::abs(s(i) - res.branches[best].sigma) < std::abs(ref - res.branches[best].sigma)) ref = s(i);
    RunReport r = base(cfg, instanceName(cfg, "diag-half"));
    r.estimate = res.sampleEstimate(best, rng);
    r.reference = ref;
    r.relativeError = relErr(r.estimate, r.reference);
    r.fidelity = res.branches[best].successProbability;
    r.epsilon = eps;
    r.ledger = res.ledger;
    return r;
}

// ---- qls and power

struct LinearInstance {
    ComplexMatrix h;
    StateVector b;
    std::string name;
};

LinearInstance linearInstance(const ExperimentConfig& cfg, const char* dflt) {
    LinearInstance li;
    li.name = instanceName(cfg, dflt);
    if (auto m = input(cfg, "matrix")) {
        li.h = readMatrixMarket(*m);
        li.b = StateVector::Ones(li.h.rows());
        if (auto v = input(cfg, "vector")) li.b = vectorOf(readMatrixMarket(*v));
    } else if (li.name == "identity") {
        li.h = ComplexMatrix::Identity(2, 2);
        li.b.resize(2);
        li.b << 1.0, cplx(0.0, 2.0);
    } else if (li.name == "diag") {
        li.h = diagonal({1.0, 0.5});
        li.b = StateVector::Ones(2);
    } else {
        fail(ErrorKind::Config, "unknown fixture '" + li.name + "'");
    }
    li.b = normalized(li.b);
    return li;
}

RunReport runQLS(const ExperimentConfig& cfg) {
    LinearInstance li = linearInstance(cfg, "identity");
    const double eps = cfg.epsilon.value_or(1e-3), kappa = cfg.kappa.value_or(2.0);
    const double delta = cfg.delta.value_or(0.1);
    BlockEncoding u = exactEncode(li.h, 1.0);
    QLSResult q = qlsSolve(u, li.b, makeQLSConfig(kappa, eps));
    std::mt19937_64 rng(cfg.seed);
    NormEstimate n = qlsNormEstimate(u, li.b, kappa, 1.0, std::max(eps, 0.01), delta, rng);
    const StateVector x = pseudoinverse(li.h) * li.b;
    RunReport r = base(cfg, li.name);
    StateVector st = q.state;
    if (st.size() > x.size()) st = st.head(x.size()).eval();
    r.fidelity = fidelity(st, normalized(x));
    r.estimate = n.gamma;
    r.reference = x.norm();
    r.relativeError = relErr(r.estimate, r.reference);
    r.kappa = kappa;
    r.epsilon = eps;
    r.ledger = q.ledger;
    return r;
}

RunReport runPower(const ExperimentConfig& cfg) {
    LinearInstance li = linearInstance(cfg, "diag");
    const double eps = cfg.epsilon.value_or(1e-3), kappa = cfg.kappa.value_or(2.0);
    const double c = cfg.c.value_or(cfg.positive ? 0.5 : 1.0);
    BlockEncoding u = exactEncode(li.h, 1.0);
    RunReport r = base(cfg, li.name);
    r.kappa = kappa;
    r.epsilon = eps;
    if (cfg.positive) {
        BlockEncoding e = positivePower(u, c, kappa, eps);
        const StateVector out = e.extracted() * li.b;
        const StateVector ref = hermitianFunction(li.h, [c](double x) { return std::pow(std::abs(x), c); }) * li.b;
        r.fidelity = fidelity(normalized(out), normalized(ref));
        r.estimate = out.norm();
        r.reference = ref.norm();
        r.ledger = e.ledger;
    } else {
        QLSResult q = negativePowerSolve(u, li.b, c, kappa, eps);
        std::mt19937_64 rng(cfg.seed);
        NormEstimate n = negativePowerNorm(u, li.b, c, kappa, std::max(eps, 0.01), cfg.delta.value_or(0.1), rng);
        auto f = [c](double x) { return x == 0.0 ? 0.0 : (x < 0.0 ? -1.0 : 1.0) * std::pow(std::abs(x), -c); };
        const StateVector ref = hermitianFunction(li.h, f) * li.b;
        r.fidelity = fidelity(q.state, normalized(ref));
        r.estimate = n.gamma;
        r.reference = ref.norm();
        r.ledger = q.ledger;
    }
    r.relativeError = relErr(r.estimate, r.reference);
    return r;
}

// ---- regression

RegressionProblem lineFixture(bool gls) {
    RegressionProblem p;
    p.X.resize(3, 2);
    p.X << 1.0, 0.0, 1.0, 1.0, 1.0, 2.0;
    Eigen::Vector2d beta(0.5, -0.25);
    p.y = p.X * beta;
    Eigen::MatrixXd a;
    if (gls) {
        Eigen::MatrixXd om = Eigen::MatrixXd::Identity(3, 3);
        om(0, 1) = om(1, 0) = 0.3;
        om(2, 2) = 0.5;
        om /= spectralNorm(om.cast<cplx>());
        p.omega = om;
        a = p.X;
        p.kappaOmega = kappaFor(om.cast<cplx>());
    } else {
        p.weights = Eigen::Vector3d(1.0, 2.0, 1.0);
        a = p.weights->cwiseSqrt().asDiagonal() * p.X;
    }
    const double s = 0.99 / spectralNorm(a.cast<cplx>());
    p.X *= s;
    p.y *= s;
    p.kappaA = kappaFor(a.cast<cplx>());
    p.eta = 0.5;
    return p;
}

struct Whitened {
    ComplexMatrix a;
    StateVector b;
};

Whitened whiten(const RegressionProblem& p) {
    Whitened w;
    w.a = p.X.cast<cplx>();
    w.b = p.y.cast<cplx>();
    if (p.omega) {
        const ComplexMatrix s = hermitianFunction(p.omega->cast<cplx>(), [](double x) { return 1.0 / std::sqrt(x); });
        w.a = s * w.a;
        w.b = s * w.b;
    } else if (p.weights) {
        const Eigen::VectorXcd s = p.weights->cwiseSqrt().cast<cplx>();
        w.a = s.asDiagonal() * w.a;
        w.b = s.asDiagonal() * w.b;
    }
    return w;
}

RunReport runRegression(const ExperimentConfig& cfg) {
    const bool gls = cfg.task == Task::GLS;
    RegressionProblem p;
    std::string name;
    if (auto path = input(cfg, "problem")) {
        p = loadRegressionProblem(*path);
        name = instanceName(cfg, "");
    } else {
        name = cfg.fixture.empty() ? "line" : cfg.fixture;
        if (name != "line") fail(ErrorKind::Config, "unknown fixture '" + name + "'");
        p = lineFixture(gls);
    }
    if (cfg.kappa) p.kappaA = *cfg.kappa;
    const double eps = cfg.epsilon.value_or(1e-3);
    RegressionResult res;
    if (gls) {
        static const std::map<std::string, GLSRoute> routes{{"omega-inv-sqrt", GLSRoute::OmegaInverseSqrt},
                                                            {"omega", GLSRoute::Omega},
                                                            {"kp", GLSRoute::KP},
                                                            {"sparse", GLSRoute::Sparse}};
        auto it = routes.find(cfg.route.empty() ? "omega-inv-sqrt" : cfg.route);
        if (it == routes.end()) fail(ErrorKind::Config, "unknown gls route '" + cfg.route + "'");
        res = glsSolve(p, it->second, eps);
    } else {
        static const std::map<std::string, WLSRoute> routes{
            {"kp-a", WLSRoute::KPOnA}, {"kp-xw", WLSRoute::KPOnXWeights}, {"sparse", WLSRoute::Sparse}};
        auto it = routes.find(cfg.route.empty() ? "kp-a" : cfg.route);
        if (it == routes.end()) fail(ErrorKind::Config, "unknown wls route '" + cfg.route + "'");
        res = wlsSolve(p, it->second, eps);
    }
    const Whitened w = whiten(p);
    const StateVector beta = pseudoinverse(w.a) * w.b;
    const StateVector bh = normalized(w.b);
    RunReport r = base(cfg, name);
    r.fidelity = fidelity(res.state, normalized(beta));
    r.estimate = res.overlap;
    r.reference = (w.a * (pseudoinverse(w.a) * bh)).squaredNorm();
    r.relativeError = relErr(r.estimate, r.reference);
    r.kappa = res.kappa;
    r.epsilon = eps;
    r.ledger = res.ledger;
    return r;
}

// ---- network

RunReport runNetwork(const ExperimentConfig& cfg) {
    std::vector<Edge> edges;
    std::string name;
    if (auto path = input(cfg, "edges")) {
        std::ifstream in(*path);
        if (!in) fail(ErrorKind::Io, "cannot open " + *path);
        edges = parseEdgeList(in);
        name = instanceName(cfg, "");
    } else {
        name = cfg.fixture.empty() ? "P3" : cfg.fixture;
        if (name == "edge") {
            edges = {{0, 1, 2.0}};
        } else if (name == "P3") {
            edges = {{0, 1, 1.0}, {1, 2, 1.0}};
        } else if (name == "K4") {
            for (std::size_t u = 0; u < 4; ++u)
                for (std::size_t v = u + 1; v < 4; ++v) edges.push_back({u, v, 1.0});
        } else {
            fail(ErrorKind::Config, "unknown fixture '" + name + "'");
        }
    }
    const ElectricalNetwork net = buildNetwork(edges);
    const std::size_t s = cfg.source.value_or(0), t = cfg.sink.value_or(net.vertices - 1);
    NetworkRoute route = NetworkRoute::Dense;
    if (cfg.route == "sparse") {
        route = NetworkRoute::Sparse;
    } else if (!cfg.route.empty() && cfg.route != "dense") {
        fail(ErrorKind::Config, "unknown network route '" + cfg.route + "'");
    }
    const double eps = cfg.epsilon.value_or(0.1), delta = cfg.delta.value_or(0.1);
    std::mt19937_64 rng(cfg.seed);
    if (s >= net.vertices || t >= net.vertices) fail(ErrorKind::IndexOutOfRange, "terminal outside the graph");
    if (s == t) fail(ErrorKind::SameVertex, "source equals sink");
    const NetworkEstimate e =
        dissipatedPower(net, ExternalCurrent::between(net.vertices, s, t), route, eps, delta, rng, cfg.lambda);
    ComplexMatrix lap = ComplexMatrix::Zero(net.vertices, net.vertices);
    for (const Edge& ed : edges) {
        lap(ed.u, ed.u) += ed.w;
        lap(ed.v, ed.v) += ed.w;
        lap(ed.u, ed.v) -= ed.w;
        lap(ed.v, ed.u) -= ed.w;
    }
    StateVector chi = StateVector::Zero(net.vertices);
    chi(s) = 1.0;
    chi(t) = -1.0;
    RunReport r = base(cfg, name);
    r.estimate = e.estimate;
    r.reference = chi.dot(pseudoinverse(lap) * chi).real();
    r.relativeError = relErr(r.estimate, r.reference);
    r.fidelity = 1.0 - std::min(1.0, r.relativeError);
    r.kappa = e.kappa;
    r.epsilon = eps;
    r.ledger = e.ledger;
    return r;
}

std::vector<double> numberList(const nlohmann::json& j, const char* key) {
    std::vector<double> out;
    for (const auto& v : j.at(key)) out.push_back(v.get<double>());
    return out;
}

}  // namespace

const char* taskName(Task t) { return kTaskNames[static_cast<int>(t)]; }

Task parseTask(const std::string& name) {
    for (int i = 0; i < 8; ++i)
        if (name == kTaskNames[i]) return static_cast<Task>(i);
    fail(ErrorKind::Config, "unknown task '" + name + "'");
}

void ExperimentConfig::validate() const {
    auto mustBePositive = [](const std::optional<double>& v, const char* what) {
        if (v && !(*v > 0.0)) fail(ErrorKind::Config, std::string(what) + " must be positive");
    };
    mustBePositive(epsilon, "epsilon");
    mustBePositive(delta, "delta");
    mustBePositive(Delta, "Delta");
    mustBePositive(c, "c");
    if (kappa && !(*kappa >= 1.0)) fail(ErrorKind::Config, "kappa must be at least 1");
    if (p && !(*p >= 0.0 && *p <= 1.0)) fail(ErrorKind::Config, "p must lie in [0,1]");
    if (epsilon && *epsilon >= 1.0) fail(ErrorKind::Config, "epsilon must be below 1");
    if (delta && *delta >= 1.0) fail(ErrorKind::Config, "delta must be below 1");
    for (const auto& [role, path] : inputs) {
        static const char* roles[] = {"matrix", "vector", "edges", "problem"};
        if (std::find(std::begin(roles), std::end(roles), role) == std::end(roles)) {
            fail(ErrorKind::Config, "unknown input role '" + role + "'");
        }
        if (path.empty()) fail(ErrorKind::Config, "empty path for " + role);
    }
    switch (task) {
    case Task::Encode:
        if (input(*this, "vector")) fail(ErrorKind::Config, "encode takes no vector");
        break;
    case Task::HamSim:
    case Task::SVE:
    case Task::QLS:
    case Task::Power:
        if (input(*this, "vector") && !input(*this, "matrix")) fail(ErrorKind::Config, "vector needs a matrix");
        break;
    case Task::WLS:
    case Task::GLS:
        if (input(*this, "matrix") || input(*this, "edges")) fail(ErrorKind::Config, "regression takes a problem");
        break;
    case Task::Network:
        if (input(*this, "matrix") || input(*this, "problem")) fail(ErrorKind::Config, "network takes edges");
        if (source && sink && *source == *sink) fail(ErrorKind::Config, "source equals sink");
        break;
    }
    if (positive && task != Task::Power) fail(ErrorKind::Config, "positive only applies to power");
}

nlohmann::json ExperimentConfig::json() const {
    nlohmann::json j;
    j["task"] = taskName(task);
    j["seed"] = seed;
    j["muMode"] = muMode == MuMode::Frobenius ? "frobenius" : "p";
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [k, v] : inputs) in[k] = v;
    j["inputs"] = in;
    if (!fixture.empty()) j["fixture"] = fixture;
    if (!route.empty()) j["route"] = route;
    auto put = [&j](const char* k, const std::optional<double>& v) {
        if (v) j[k] = *v;
    };
    put("kappa", kappa);
    put("epsilon", epsilon);
    put("delta", delta);
    put("p", p);
    put("c", c);
    put("lambda", lambda);
    put("t", time);
    put("Delta", Delta);
    if (positive) j["positive"] = true;
    if (source) j["source"] = *source;
    if (sink) j["sink"] = *sink;
    return j;
}

std::string ExperimentConfig::digest() const { return hexDigest(json().dump()); }

ExperimentConfig configFromJson(const nlohmann::json& j, const std::string& baseDir) {
    try {
        ExperimentConfig c;
        c.task = parseTask(j.at("task").get<std::string>());
        if (j.contains("inputs")) {
            for (const auto& [k, v] : j.at("inputs").items()) {
                std::filesystem::path path(v.get<std::string>());
                if (path.is_relative() && !baseDir.empty()) path = std::filesystem::path(baseDir) / path;
                c.inputs[k] = path.lexically_normal().string();
            }
        }
        c.fixture = j.value("fixture", "");
        c.route = j.value("route", "");
        auto get = [&j](const char* k, std::optional<double>& v) {
            if (j.contains(k)) v = j.at(k).get<double>();
        };
        get("kappa", c.kappa);
        get("epsilon", c.epsilon);
        get("delta", c.delta);
        get("p", c.p);
        get("c", c.c);
        get("lambda", c.lambda);
        get("t", c.time);
        get("Delta", c.Delta);
        const std::string mu = j.value("muMode", "frobenius");
        if (mu == "frobenius") {
            c.muMode = MuMode::Frobenius;
        } else if (mu == "p") {
            c.muMode = MuMode::PNorm;
        } else {
            fail(ErrorKind::Config, "muMode must be frobenius or p");
        }
        c.positive = j.value("positive", false);
        if (j.contains("source")) c.source = j.at("source").get<std::size_t>();
        if (j.contains("sink")) c.sink = j.at("sink").get<std::size_t>();
        c.seed = j.value("seed", std::uint64_t{0});
        c.output = j.value("output", "");
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, e.what());
    }
}

ExperimentConfig loadExperimentConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, e.what());
    }
    return configFromJson(j, std::filesystem::path(path).parent_path().string());
}

std::string RunReport::json() const {
    nlohmann::json j = nlohmann::json::parse(solverReport(digest, fidelity, estimate, reference, ledger));
    j["task"] = task;
    j["instance"] = instance;
    j["seed"] = seed;
    j["relativeError"] = relativeError;
    j["kappa"] = kappa;
    j["epsilon"] = epsilon;
    return j.dump(2) + "\n";
}

RunReport runExperiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    RunReport r;
    switch (cfg.task) {
    case Task::Encode: r = runEncode(cfg); break;
    case Task::HamSim: r = runHamSim(cfg); break;
    case Task::SVE: r = runSVE(cfg); break;
    case Task::QLS: r = runQLS(cfg); break;
    case Task::Power: r = runPower(cfg); break;
    case Task::WLS:
    case Task::GLS: r = runRegression(cfg); break;
    case Task::Network: r = runNetwork(cfg); break;
    }
    r.wallSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

int exitCodeFor(const Error& e) {
    if (e.kind() == ErrorKind::Numerical) return 3;
    if (e.isContract()) return 2;
    return 1;
}

SweepFamily parseSweepFamily(const std::string& name) {
    if (name == "vtaa-kappa") return SweepFamily::VTAAKappa;
    if (name == "naive-kappa") return SweepFamily::NaiveKappa;
    if (name == "epsilon") return SweepFamily::Epsilon;
    fail(ErrorKind::Config, "unknown sweep family '" + name + "'");
}

const char* sweepFamilyName(SweepFamily f) {
    switch (f) {
    case SweepFamily::VTAAKappa: return "vtaa-kappa";
    case SweepFamily::NaiveKappa: return "naive-kappa";
    case SweepFamily::Epsilon: return "epsilon";
    }
    return "";
}

void SweepConfig::validate() const {
    if (kappas.empty() || epsilons.empty()) fail(ErrorKind::Config, "empty sweep grid");
    for (double k : kappas)
        if (!(k >= 2.0)) fail(ErrorKind::Config, "sweep kappa must be at least 2");
    for (double e : epsilons)
        if (!(e > 0.0 && e < 1.0)) fail(ErrorKind::Config, "sweep epsilon must lie in (0,1)");
    if (family != SweepFamily::Epsilon && kappas.size() < 2) fail(ErrorKind::Config, "kappa sweep needs two points");
    if (family == SweepFamily::Epsilon && epsilons.size() < 2) fail(ErrorKind::Config, "epsilon sweep needs two points");
}

SweepConfig sweepFromJson(const nlohmann::json& j) {
    try {
        SweepConfig c;
        c.family = parseSweepFamily(j.at("family").get<std::string>());
        if (j.contains("kappas")) c.kappas = numberList(j, "kappas");
        if (j.contains("epsilons")) c.epsilons = numberList(j, "epsilons");
        c.seed = j.value("seed", std::uint64_t{0});
        c.threads = j.value("threads", 0U);
        c.validate();
        return c;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, e.what());
    }
}

SlopeFit fitLogLog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) fail(ErrorKind::InvalidArgument, "need two or more points");
    const Eigen::Index n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(x[i] > 0.0 && y[i] > 0.0)) fail(ErrorKind::InvalidArgument, "log-log fit needs positive data");
        design(i, 0) = std::log(x[i]);
        design(i, 1) = 1.0;
        rhs(i) = std::log(y[i]);
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
    SlopeFit f;
    f.slope = coef(0);
    f.intercept = coef(1);
    f.residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(n));
    f.points = x.size();
    return f;
}

std::string SweepResult::csv() const {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "instance,kappa,epsilon,queries,gates,fidelity,estimate,reference,seed\n";
    for (const SweepRow& r : rows) {
        os << r.instance << ',' << r.kappa << ',' << r.epsilon << ',' << r.queries << ',' << r.gates << ','
           << r.fidelity << ',' << r.estimate << ',' << r.reference << ',' << r.seed << '\n';
    }
    return os.str();
}

std::string SweepResult::summaryJson() const {
    nlohmann::json j;
    j["family"] = sweepFamilyName(cfg.family);
    j["parameter"] = cfg.family == SweepFamily::Epsilon ? "1/epsilon" : "kappa";
    j["slope"] = fit.slope;
    j["intercept"] = fit.intercept;
    j["residual"] = fit.residual;
    j["points"] = fit.points;
    j["ratio"] = ratio;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

SweepResult scalingSweep(const SweepConfig& cfg) {
    cfg.validate();
    struct Point {
        double kappa, eps;
    };
    std::vector<Point> grid;
    if (cfg.family == SweepFamily::Epsilon) {
        for (double e : cfg.epsilons) grid.push_back({cfg.kappas.front(), e});
    } else {
        for (double k : cfg.kappas) grid.push_back({k, cfg.epsilons.front()});
    }
    auto runPoint = [&cfg](std::size_t idx, Point pt) {
        const ComplexMatrix h = diagonal({1.0, 1.0 / pt.kappa});
        StateVector b = StateVector::Zero(2);
        b(1) = 1.0;
        const BlockEncoding u = exactEncode(h, 1.0);
        SweepRow row;
        std::ostringstream name;
        name << sweepFamilyName(cfg.family) << '-' << idx;
        row.instance = name.str();
        row.kappa = pt.kappa;
        row.epsilon = pt.eps;
        row.seed = cfg.seed + idx;
        StateVector st;
        CostLedger ledger;
        if (cfg.family == SweepFamily::NaiveKappa) {
            AppliedState a = naiveInverseState(u, b, pt.kappa, pt.eps);
            st = a.state;
            ledger = a.ledger;
        } else {
            QLSResult q = qlsSolve(u, b, makeQLSConfig(pt.kappa, pt.eps));
            st = q.state;
            ledger = q.ledger;
        }
        const StateVector x = pseudoinverse(h) * b;
        row.queries = ledger.totalQueries();
        row.gates = ledger.gates;
        row.fidelity = fidelity(st, normalized(x));
        std::mt19937_64 rng(row.seed);
        row.estimate = qlsNormEstimate(u, b, pt.kappa, 1.0, 0.1, 0.1, rng).gamma;
        row.reference = x.norm();
        return row;
    };
    const unsigned hw = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
    SweepResult out;
    out.cfg = cfg;
    out.rows.resize(grid.size());
    for (std::size_t start = 0; start < grid.size(); start += hw) {
        std::vector<std::future<SweepRow>> jobs;
        for (std::size_t i = start; i < std::min(grid.size(), start + hw); ++i)
            jobs.push_back(std::async(std::launch::async, runPoint, i, grid[i]));
        for (std::size_t i = 0; i < jobs.size(); ++i) out.rows[start + i] = jobs[i].get();
    }
    std::vector<double> xs, qs;
    for (const SweepRow& r : out.rows) {
        xs.push_back(cfg.family == SweepFamily::Epsilon ? 1.0 / r.epsilon : r.kappa);
        qs.push_back(r.queries);
    }
    out.fit = fitLogLog(xs, qs);
    if (cfg.family == SweepFamily::Epsilon) {
        std::size_t lo = 0, hi = 0;
        for (std::size_t i = 1; i < out.rows.size(); ++i) {
            if (out.rows[i].epsilon < out.rows[lo].epsilon) lo = i;
            if (out.rows[i].epsilon > out.rows[hi].epsilon) hi = i;
        }
        out.ratio = out.rows[lo].queries / out.rows[hi].queries;
    } else {
        out.ratio = out.rows.back().queries / out.rows.front().queries;
    }
    return out;
}

}  // namespace blockenc

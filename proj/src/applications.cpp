#include "blockenc/applications.hpp"

#include "blockenc/hamsim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <queue>
#include <sstream>

namespace blockenc {

namespace {

constexpr double kNormTol = 1e-12;

BlockEncoding relabel(BlockEncoding u, const std::string& oracle) {
    const double gates = u.ledger.gates;
    u.ledger = CostLedger::single(oracle);
    u.ledger.gates = gates;
    return u;
}

// Same circuit, operator divided by s.
BlockEncoding rescaled(BlockEncoding u, double s) {
    u.alpha /= s;
    u.epsilon /= s;
    if (u.target) *u.target /= s;
    return u;
}

// U on the first n system states, identity on `extra` further ones: block diag(A/alpha, I).
BlockEncoding directSumIdentity(const BlockEncoding& u, std::size_t extra) {
    const std::size_t n = u.systemDim, m = n + extra;
    const std::size_t da = std::size_t{1} << u.ancillas;
    checkCapacity(da * m, "direct sum");
    BlockEncoding out;
    out.unitary = ComplexMatrix::Zero(static_cast<Eigen::Index>(da * m), static_cast<Eigen::Index>(da * m));
    for (std::size_t a = 0; a < da; ++a) {
        for (std::size_t b = 0; b < da; ++b)
            out.unitary.block(a * m, b * m, n, n) = u.unitary.block(a * n, b * n, n, n);
        for (std::size_t k = 0; k < extra; ++k) out.unitary(a * m + n + k, a * m + n + k) = 1.0;
    }
    out.alpha = u.alpha;
    out.ancillas = u.ancillas;
    out.epsilon = u.epsilon;
    out.systemDim = m;
    out.ledger = u.ledger;
    out.ledger.gates += u.ancillas + 1;
    ComplexMatrix t = ComplexMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    t.topLeftCorner(n, n) = u.target ? *u.target : u.extracted();
    t.bottomRightCorner(extra, extra) = u.alpha * ComplexMatrix::Identity(extra, extra);
    out.target = t;
    return out;
}

// Composes with a system unitary s: block s A (left) or A s (right), no extra ancillas.
BlockEncoding withSystemUnitary(const BlockEncoding& u, const ComplexMatrix& s, bool left) {
    const Eigen::Index da = Eigen::Index{1} << u.ancillas;
    const ComplexMatrix lift = kron(ComplexMatrix::Identity(da, da), s);
    BlockEncoding out = u;
    out.unitary = left ? ComplexMatrix(lift * u.unitary) : ComplexMatrix(u.unitary * lift);
    if (u.target) out.target = left ? ComplexMatrix(s * *u.target) : ComplexMatrix(*u.target * s);
    out.ledger.gates += static_cast<double>(ceilLog2(u.systemDim));
    return out;
}

ComplexMatrix halfSwap(std::size_t m) {
    ComplexMatrix sw = ComplexMatrix::Zero(static_cast<Eigen::Index>(2 * m), static_cast<Eigen::Index>(2 * m));
    sw.topRightCorner(m, m).setIdentity();
    sw.bottomLeftCorner(m, m).setIdentity();
    return sw;
}

// Moves the most significant system qubit into the ancilla register.
BlockEncoding absorbTopQubit(const BlockEncoding& u) {
    if (u.systemDim % 2 != 0) fail(ErrorKind::DimensionMismatch, "system dimension must be even");
    BlockEncoding out = u;
    const std::size_t h = u.systemDim / 2;
    out.systemDim = h;
    out.ancillas = u.ancillas + 1;
    if (u.target) out.target = ComplexMatrix(u.target->topLeftCorner(h, h));
    return out;
}

std::size_t maxRowNonzeros(const ComplexMatrix& a) {
    std::size_t s = 1;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        std::size_t c = 0;
        for (Eigen::Index j = 0; j < a.cols(); ++j) c += std::abs(a(i, j)) > 0.0;
        s = std::max(s, c);
    }
    return s;
}

BlockEncoding sparseEncode(const ComplexMatrix& a, const std::string& oracle) {
    const std::size_t sR = maxRowNonzeros(a), sC = maxRowNonzeros(a.transpose());
    return relabel(fromSparseAccess(denseOracles(a), sR, sC, 0.0), oracle);
}

ComplexMatrix dilation(const Eigen::MatrixXd& a) { return hermitianDilation(a.cast<cplx>()); }

Eigen::MatrixXd symmetricPower(const Eigen::MatrixXd& s, double p) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    Eigen::VectorXd d = es.eigenvalues().array().pow(p);
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

double qlsNoiseBudget(double kappa, double eps) {
    const double l = std::log(kappa / eps);
    return eps / (kappa * kappa * std::max(1.0, l * l * l));
}

StateVector padTo(const StateVector& v, std::size_t n) {
    StateVector out = StateVector::Zero(static_cast<Eigen::Index>(n));
    out.head(v.size()) = v;
    return out;
}

void checkResidual(const RegressionProblem& p, double& residual) {
    if (!(p.eta >= 0.0 && p.eta < 1.0)) fail(ErrorKind::InvalidArgument, "eta must lie in [0,1)");
    residual = residualStats(p);
    if (residual > p.eta + 1e-12) {
        fail(ErrorKind::ResidualViolation,
             "residual " + std::to_string(residual) + " exceeds eta " + std::to_string(p.eta));
    }
}

// Pseudoinverse through a Hermitian dilation of dimension rows + cols; the answer sits in the column block.
RegressionResult solveDilated(const BlockEncoding& u, const StateVector& psi, std::size_t rows, std::size_t cols,
                              double kappa, double gamma, double eps) {
    QLSResult q = pseudoinverseState(u, padTo(psi, u.systemDim), kappa, gamma, eps);
    RegressionResult r;
    r.state = normalized(q.state.segment(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)));
    r.ledger = q.ledger;
    r.kappa = kappa;
    r.gammaLower = gamma;
    return r;
}

RegressionResult solveWrapped(const BlockEncoding& u, const StateVector& psi, std::size_t cols, double kappa,
                              double gamma, double eps) {
    QLSResult q = pseudoinverseState(u, psi, kappa, gamma, eps);
    RegressionResult r;
    r.state = normalized(q.state.head(static_cast<Eigen::Index>(cols)));
    r.ledger = q.ledger;
    r.kappa = kappa;
    r.gammaLower = gamma;
    return r;
}

Eigen::MatrixXd realPart(const ComplexMatrix& a, const std::string& what) {
    if (a.imag().cwiseAbs().maxCoeff() > 0.0) fail(ErrorKind::Io, what + ": complex entries are not supported");
    return a.real();
}

}  // namespace

void RegressionProblem::validate() const {
    if (X.rows() == 0 || X.cols() == 0) fail(ErrorKind::InvalidArgument, "empty design matrix");
    if (X.rows() < X.cols()) fail(ErrorKind::DimensionMismatch, "design matrix needs M >= N");
    if (y.size() != X.rows()) fail(ErrorKind::DimensionMismatch, "y length differs from the row count");
    if (!X.allFinite() || !y.allFinite()) fail(ErrorKind::InvalidArgument, "non-finite data");
    if (weights) {
        if (weights->size() != X.rows()) fail(ErrorKind::DimensionMismatch, "one weight per row");
        if ((weights->array() < 1.0).any()) fail(ErrorKind::WeightOutOfRange, "weights must be at least 1");
    }
    if (omega) {
        if (omega->rows() != X.rows() || omega->cols() != X.rows()) fail(ErrorKind::DimensionMismatch, "omega shape");
        if ((*omega - omega->transpose()).norm() > 1e-12 * std::max(1.0, omega->norm())) {
            fail(ErrorKind::InvalidArgument, "omega must be symmetric");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*omega);
        if (es.eigenvalues().minCoeff() <= 0.0) fail(ErrorKind::InvalidArgument, "omega must be positive definite");
        if (es.eigenvalues().maxCoeff() > 1.0 + kNormTol) fail(ErrorKind::NormTooLarge, "||omega|| must be at most 1");
    }
    if (!(kappaA >= 1.0) || !(kappaOmega >= 1.0)) fail(ErrorKind::InvalidArgument, "condition bounds must be >= 1");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(whitenedDesign(*this));
    if (svd.singularValues().minCoeff() <= 1e-12) fail(ErrorKind::Precondition, "normal matrix is singular");
}

Eigen::MatrixXd whitenedDesign(const RegressionProblem& p) {
    if (p.omega) return symmetricPower(*p.omega, -0.5) * p.X;
    if (p.weights) return p.weights->cwiseSqrt().asDiagonal() * p.X;
    return p.X;
}

Eigen::VectorXd whitenedTarget(const RegressionProblem& p) {
    if (p.omega) return symmetricPower(*p.omega, -0.5) * p.y;
    if (p.weights) return p.weights->cwiseSqrt().asDiagonal() * p.y;
    return p.y;
}

double residualStats(const RegressionProblem& p) {
    const Eigen::MatrixXd a = whitenedDesign(p);
    Eigen::VectorXd b = whitenedTarget(p);
    if (b.norm() == 0.0) fail(ErrorKind::ZeroVector, "target vector is zero");
    b /= b.norm();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU);
    const double tol = 1e-12 * std::max(1.0, svd.singularValues()(0));
    double proj = 0.0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) proj += std::pow(svd.matrixU().col(i).dot(b), 2);
    return std::clamp(1.0 - proj, 0.0, 1.0);
}

Eigen::VectorXd normalEquationsSolution(const RegressionProblem& p) {
    if (p.omega) {
        Eigen::LLT<Eigen::MatrixXd> om(*p.omega);
        const Eigen::MatrixXd oiX = om.solve(p.X);
        return (p.X.transpose() * oiX).ldlt().solve(oiX.transpose() * p.y);
    }
    const Eigen::VectorXd w = p.weights ? *p.weights : Eigen::VectorXd::Ones(p.X.rows());
    const Eigen::MatrixXd xtw = p.X.transpose() * w.asDiagonal();
    return (xtw * p.X).ldlt().solve(xtw * p.y);
}

RegressionResult wlsSolve(const RegressionProblem& p, WLSRoute route, double eps) {
    p.validate();
    double residual = 0.0;
    checkResidual(p, residual);
    const Eigen::MatrixXd a = whitenedDesign(p);
    if (p.omega) fail(ErrorKind::InvalidArgument, "covariance given; use the GLS solver");
    if (spectralNorm(a.cast<cplx>()) > 1.0 + kNormTol) fail(ErrorKind::NormTooLarge, "||sqrt(W) X|| must be at most 1");
    const std::size_t m = a.rows(), n = a.cols();
    const double kappa = std::max(2.0, p.kappaA);
    const double gamma = 1.0 - p.eta;
    const StateVector psi = vectorState(KPTree::fromVector(whitenedTarget(p)));
    RegressionResult r;
    switch (route) {
        case WLSRoute::KPOnA: {
            KPTree tree = KPTree::fromMatrix(a);
            r = solveDilated(fromKP({&tree, nullptr, nullptr}, muOf(tree), 0.0), psi, m, n, kappa, gamma, eps);
            break;
        }
        case WLSRoute::KPOnXWeights: {
            if (!p.weights) fail(ErrorKind::MissingStorage, "this route needs the stored weights");
            KPTree tree = KPTree::fromMatrix(p.X);
            BlockEncoding ux = fromKP({&tree, nullptr, nullptr}, muOf(tree), 0.0);
            const double wMax = p.weights->maxCoeff();
            ComplexMatrix sw = p.weights->cwiseSqrt().cast<cplx>().asDiagonal();
            BlockEncoding d = directSumIdentity(relabel(exactEncode(sw, std::sqrt(wMax)), "weights"), n);
            BlockEncoding u = rescaled(product(product(d, ux), d), std::sqrt(wMax));
            r = solveDilated(u, psi, m, n, kappa, gamma, eps);
            break;
        }
        case WLSRoute::Sparse:
            r = solveDilated(sparseEncode(dilation(a), "sparse"), psi, m, n, kappa, gamma, eps);
            break;
    }
    r.overlap = 1.0 - residual;
    return r;
}

RegressionResult glsSolve(const RegressionProblem& p, GLSRoute route, double eps) {
    if (!p.omega) fail(ErrorKind::MissingStorage, "the GLS solver needs the covariance");
    p.validate();
    double residual = 0.0;
    checkResidual(p, residual);
    if (spectralNorm(p.X.cast<cplx>()) > 1.0 + kNormTol) fail(ErrorKind::NormTooLarge, "||X|| must be at most 1");
    const std::size_t m = p.X.rows(), n = p.X.cols();
    const double kOmega = std::max(2.0, p.kappaOmega);
    const double s = std::sqrt(kOmega);
    const double kappa = std::max(2.0, p.kappaA * s);
    const double gamma = 1.0 - p.eta;
    const double budget = qlsNoiseBudget(kappa, eps);
    const Eigen::MatrixXd& om = *p.omega;

    std::optional<KPTree> treeX;
    std::optional<BlockEncoding> ux;
    double xAlpha = 1.0;
    if (route == GLSRoute::KP) {
        // Stored with zero columns up to M x M; [[0,X],[X^T,0]] swap has X in its top-left block.
        Eigen::MatrixXd xp = Eigen::MatrixXd::Zero(m, m);
        xp.leftCols(n) = p.X;
        treeX.emplace(KPTree::fromMatrix(xp));
        BlockEncoding xbar = fromKP({&*treeX, nullptr, nullptr}, muOf(*treeX), 0.0);
        ux = absorbTopQubit(withSystemUnitary(xbar, halfSwap(m), false));
        xAlpha = ux->alpha;
    } else if (route == GLSRoute::Sparse) {
        ux = sparseEncode(p.X.cast<cplx>(), "U_X");
        xAlpha = ux->alpha;
    } else {
        ux = relabel(exactEncode(p.X.cast<cplx>(), 1.0), "U_X");
    }
    const double epsB = 0.5 * budget * s / xAlpha;

    BlockEncoding b;
    switch (route) {
        case GLSRoute::OmegaInverseSqrt:
            b = relabel(exactEncode(symmetricPower(om, -0.5).cast<cplx>(), s), "U_Omega^-1/2");
            break;
        case GLSRoute::Omega:
            b = negativePower(relabel(exactEncode(om.cast<cplx>(), 1.0), "U_Omega"), 0.5, kOmega, epsB);
            break;
        case GLSRoute::KP: {
            KPTree treeO = KPTree::fromMatrix(om);
            BlockEncoding obar = fromKP({&treeO, nullptr, nullptr}, muOf(treeO), 0.0);
            BlockEncoding uo = absorbTopQubit(withSystemUnitary(obar, halfSwap(m), true));
            b = negativePower(uo, 0.5, kOmega, epsB);
            break;
        }
        case GLSRoute::Sparse:
            b = negativePower(sparseEncode(om.cast<cplx>(), "U_Omega"), 0.5, kOmega, epsB);
            break;
    }

    const StateVector y = route == GLSRoute::KP ? vectorState(KPTree::fromVector(p.y)) : normalized(p.y.cast<cplx>());
    AppliedState prep = applyToState(rescaled(b, s), padTo(y, b.systemDim), (1.0 - 1e-6) / s, eps);
    const StateVector psi = prep.state.head(static_cast<Eigen::Index>(m));

    RegressionResult r = solveWrapped(rescaled(product(b, *ux), s), psi, n, kappa, gamma, eps);
    r.ledger += prep.ledger;
    r.overlap = 1.0 - residual;
    return r;
}

RegressionProblem loadRegressionProblem(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, path + ": " + e.what());
    }
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto load = [&](const char* key) {
        const std::string rel = j.at(key).get<std::string>();
        return realPart(readMatrixMarket((base / rel).string()), rel);
    };
    RegressionProblem p;
    try {
        p.X = load("X");
        Eigen::MatrixXd y = load("y");
        p.y = Eigen::Map<Eigen::VectorXd>(y.data(), y.size());
        if (j.contains("weights")) {
            Eigen::MatrixXd w = load("weights");
            p.weights = Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(w.data(), w.size()));
        }
        if (j.contains("omega")) p.omega = load("omega");
        p.kappaA = j.at("kappa").get<double>();
        p.kappaOmega = j.value("kappaOmega", 1.0);
        p.eta = j.at("eta").get<double>();
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, path + ": " + e.what());
    }
    p.validate();
    return p;
}

ElectricalNetwork buildNetwork(const std::vector<Edge>& edges, std::optional<double> wMax) {
    if (edges.empty()) fail(ErrorKind::EmptyList, "no edges");
    ElectricalNetwork net;
    net.edges = edges;
    double top = 1.0;
    for (const Edge& e : edges) {
        if (e.u == e.v) fail(ErrorKind::SameVertex, "self-loop at vertex " + std::to_string(e.u));
        if (!(e.w >= 1.0) || !std::isfinite(e.w)) fail(ErrorKind::WeightOutOfRange, "edge weights must be >= 1");
        net.vertices = std::max({net.vertices, e.u + 1, e.v + 1});
        top = std::max(top, e.w);
    }
    net.wMax = wMax.value_or(top);
    if (top > net.wMax) fail(ErrorKind::WeightOutOfRange, "edge weight above w_max");
    const std::size_t n = net.vertices, m = edges.size();
    checkCapacity(std::max(n, m), "network");

    std::vector<std::vector<std::size_t>> adj(n);
    for (const Edge& e : edges) {
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    std::vector<bool> seen(n, false);
    std::queue<std::size_t> q;
    q.push(0);
    seen[0] = true;
    std::size_t count = 1;
    while (!q.empty()) {
        const std::size_t x = q.front();
        q.pop();
        for (std::size_t y : adj[x])
            if (!seen[y]) {
                seen[y] = true;
                ++count;
                q.push(y);
            }
    }
    if (count != n) fail(ErrorKind::DisconnectedGraph, "graph is not connected");

    net.incidence = Eigen::MatrixXd::Zero(n, m);
    net.weights.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        net.incidence(edges[k].u, k) = 1.0;
        net.incidence(edges[k].v, k) = -1.0;
        net.weights(k) = edges[k].w;
    }
    for (const auto& a : adj) net.maxDegree = std::max(net.maxDegree, a.size());
    net.C = net.incidence * net.weights.cwiseSqrt().asDiagonal();
    net.laplacian = net.C * net.C.transpose();
    const Eigen::VectorXd dInv = net.laplacian.diagonal().cwiseSqrt().cwiseInverse();
    net.normalizedLaplacian = dInv.asDiagonal() * net.laplacian * dInv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(net.normalizedLaplacian);
    net.lambda2 = es.eigenvalues()(1);
    return net;
}

std::vector<Edge> parseEdgeList(std::istream& in) {
    std::vector<Edge> out;
    std::string line;
    std::size_t lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ss(line);
        Edge e;
        long u = -1, v = -1;
        if (!(ss >> u)) continue;
        if (!(ss >> v) || u < 0 || v < 0) fail(ErrorKind::Config, "edge list line " + std::to_string(lineNo));
        e.u = static_cast<std::size_t>(u);
        e.v = static_cast<std::size_t>(v);
        if (!(ss >> e.w)) e.w = 1.0;
        std::string extra;
        if (ss >> extra) fail(ErrorKind::Config, "edge list line " + std::to_string(lineNo) + ": trailing fields");
        out.push_back(e);
    }
    return out;
}

void ExternalCurrent::validate(std::size_t vertices) const {
    if (static_cast<std::size_t>(values.size()) != vertices) fail(ErrorKind::DimensionMismatch, "one value per vertex");
    if (values.norm() == 0.0) fail(ErrorKind::ZeroVector, "external current is zero");
    if (std::abs(values.sum()) > 1e-12 * std::max(1.0, values.lpNorm<1>())) {
        fail(ErrorKind::InvalidArgument, "external current must sum to zero");
    }
}

ExternalCurrent ExternalCurrent::between(std::size_t vertices, std::size_t s, std::size_t t) {
    if (s >= vertices || t >= vertices) fail(ErrorKind::IndexOutOfRange, "vertex index");
    if (s == t) fail(ErrorKind::SameVertex, "s and t coincide");
    ExternalCurrent c;
    c.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(vertices));
    c.values(static_cast<Eigen::Index>(s)) = 1.0;
    c.values(static_cast<Eigen::Index>(t)) = -1.0;
    return c;
}

double networkKappa(const ElectricalNetwork& net, double lambda) {
    if (!(lambda > 0.0)) fail(ErrorKind::GapViolation, "spectral gap must be positive");
    return std::sqrt(2.0 * static_cast<double>(net.maxDegree) * net.wMax / lambda);
}

double pseudoinverseIdentityError(const ElectricalNetwork& net, const ExternalCurrent& iExt) {
    iExt.validate(net.vertices);
    const Eigen::Index n = static_cast<Eigen::Index>(net.vertices), m = net.C.cols();
    const Eigen::MatrixXd lPlus = pseudoinverse(net.laplacian.cast<cplx>()).real();
    const Eigen::VectorXd potential = lPlus * iExt.values;
    const Eigen::VectorXd edgeCurrent = net.weights.asDiagonal() * (net.incidence.transpose() * potential);
    const Eigen::VectorXd expected = net.weights.cwiseSqrt().cwiseInverse().asDiagonal() * edgeCurrent;
    StateVector rhs = StateVector::Zero(n + m);
    rhs.head(n) = iExt.values.cast<cplx>();
    const StateVector got = pseudoinverse(dilation(net.C)) * rhs;
    double err = got.head(n).cwiseAbs().maxCoeff();
    err = std::max(err, (got.tail(m) - expected.cast<cplx>()).cwiseAbs().maxCoeff());
    return err;
}

double dissipatedPowerReference(const ElectricalNetwork& net, const ExternalCurrent& iExt) {
    iExt.validate(net.vertices);
    const Eigen::MatrixXd lPlus = pseudoinverse(net.laplacian.cast<cplx>()).real();
    return iExt.values.dot(lPlus * iExt.values);
}

NetworkEstimate dissipatedPower(const ElectricalNetwork& net, const ExternalCurrent& iExt, NetworkRoute route,
                                double eps, double delta, std::mt19937_64& rng, std::optional<double> lambda) {
    iExt.validate(net.vertices);
    if (!(eps > 0.0 && eps < 1.0)) fail(ErrorKind::InvalidArgument, "eps must lie in (0,1)");
    const double lam = lambda.value_or(net.lambda2);
    if (!(lam > 0.0) || lam > net.lambda2 * (1.0 + 1e-12)) {
        fail(ErrorKind::GapViolation, "gap bound " + std::to_string(lam) + " exceeds the normalized-Laplacian gap " +
                                          std::to_string(net.lambda2));
    }
    const double scale = std::sqrt(2.0 * static_cast<double>(net.maxDegree) * net.wMax);
    const ComplexMatrix c = (net.C / scale).cast<cplx>();
    NetworkEstimate out;
    out.kappa = std::max(2.0, networkKappa(net, lam));
    const BlockEncoding u =
        route == NetworkRoute::Dense ? relabel(exactEncode(c, 1.0), "U_C") : sparseEncode(c, "U_C");
    const StateVector psi = normalized(iExt.values.cast<cplx>());
    NormEstimate g = qlsNormEstimate(u, psi, out.kappa, 1.0, eps / 3.0, delta, rng);
    out.normEstimate = g.gamma;
    const double n2 = iExt.values.squaredNorm();
    out.estimate = n2 * g.gamma * g.gamma / (scale * scale);
    out.reference = dissipatedPowerReference(net, iExt);
    out.ledger = CostLedger::single("U_C", g.runQueries + g.estimationQueries);
    return out;
}

NetworkEstimate effectiveResistance(const ElectricalNetwork& net, std::size_t s, std::size_t t, double eps,
                                    double delta, std::mt19937_64& rng, NetworkRoute route) {
    return dissipatedPower(net, ExternalCurrent::between(net.vertices, s, t), route, eps, delta, rng);
}

}  // namespace blockenc

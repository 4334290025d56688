#include "blockenc/block_encoding.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

namespace blockenc {

double CostLedger::totalQueries() const {
    double t = 0.0;
    for (const auto& [name, count] : queries) t += count;
    return t;
}

CostLedger CostLedger::scaled(double factor) const {
    CostLedger out = *this;
    for (auto& [name, count] : out.queries) count *= factor;
    out.gates *= factor;
    return out;
}

CostLedger& CostLedger::operator+=(const CostLedger& other) {
    for (const auto& [name, count] : other.queries) queries[name] += count;
    gates += other.gates;
    return *this;
}

CostLedger CostLedger::single(const std::string& oracle, double count) {
    CostLedger l;
    l.queries[oracle] = count;
    return l;
}

ComplexMatrix BlockEncoding::block() const {
    return unitary.topLeftCorner(systemDim, systemDim);
}

double BlockEncoding::measuredError() const {
    if (!target) fail(ErrorKind::Precondition, "no target attached");
    return spectralNorm(*target - extracted());
}

void BlockEncoding::validate() const {
    if (unitary.rows() != unitary.cols() ||
        static_cast<std::size_t>(unitary.rows()) != (systemDim << ancillas)) {
        fail(ErrorKind::DimensionMismatch, "unitary dimension != systemDim * 2^a");
    }
    if (alpha < 0.0 || epsilon < 0.0) fail(ErrorKind::InvalidArgument, "negative alpha or epsilon");
}

std::string BlockEncoding::descriptorJson() const {
    nlohmann::json j;
    j["alpha"] = alpha;
    j["ancillas"] = ancillas;
    j["epsilon"] = epsilon;
    j["systemDim"] = systemDim;
    j["ledger"]["queries"] = ledger.queries;
    j["ledger"]["gates"] = ledger.gates;
    return j.dump(2);
}

ComplexMatrix padSquare(const ComplexMatrix& a) {
    const Eigen::Index n = std::max(a.rows(), a.cols());
    ComplexMatrix out = ComplexMatrix::Zero(n, n);
    out.topLeftCorner(a.rows(), a.cols()) = a;
    return out;
}

BlockEncoding encodeBlock(const ComplexMatrix& blk, double alpha, int ancillas, double epsilon,
                          CostLedger ledger) {
    if (blk.rows() != blk.cols()) fail(ErrorKind::DimensionMismatch, "block must be square");
    if (ancillas < 1) fail(ErrorKind::InvalidArgument, "at least one ancilla is needed");
    const std::size_t n = blk.rows();
    checkCapacity(n << ancillas, "block-encoding");
    ComplexMatrix d = unitaryDilation(blk);
    BlockEncoding be;
    be.unitary = ancillas == 1 ? d : kron(ComplexMatrix::Identity(1 << (ancillas - 1), 1 << (ancillas - 1)), d);
    be.alpha = alpha;
    be.ancillas = ancillas;
    be.epsilon = epsilon;
    be.systemDim = n;
    be.ledger = std::move(ledger);
    return be;
}

BlockEncoding exactEncode(const ComplexMatrix& a, double alpha) {
    if (!a.allFinite()) fail(ErrorKind::InvalidArgument, "non-finite matrix");
    const double na = spectralNorm(a);
    if (!(alpha > 0.0) || na > alpha * (1.0 + kConstructTol)) {
        fail(ErrorKind::AlphaTooSmall, "alpha " + std::to_string(alpha) + " below norm " + std::to_string(na));
    }
    ComplexMatrix p = padSquare(a);
    BlockEncoding be = encodeBlock(p / alpha, alpha, 1, 0.0, CostLedger::single("input"));
    be.target = p;
    return be;
}

BlockEncoding product(const BlockEncoding& u, const BlockEncoding& v) {
    if (u.systemDim != v.systemDim) fail(ErrorKind::DimensionMismatch, "system dimensions differ");
    const std::size_t n = u.systemDim;
    const std::size_t da = std::size_t{1} << u.ancillas, db = std::size_t{1} << v.ancillas;
    const std::size_t dim = n * da * db;
    checkCapacity(dim, "product");
    // Layout [V ancillas][U ancillas][system]; block (va, vb) of (I x U)(V lifted) is U (I x V_{va,vb}).
    BlockEncoding out;
    out.unitary = ComplexMatrix::Zero(dim, dim);
    const std::size_t ud = n * da;
    for (std::size_t va = 0; va < db; ++va)
        for (std::size_t vb = 0; vb < db; ++vb) {
            const ComplexMatrix vBlock = v.unitary.block(va * n, vb * n, n, n);
            if (vBlock.cwiseAbs().maxCoeff() == 0.0) continue;
            for (std::size_t ub = 0; ub < da; ++ub)
                out.unitary.block(va * ud, vb * ud + ub * n, ud, n).noalias() = u.unitary.middleCols(ub * n, n) * vBlock;
        }
    out.alpha = u.alpha * v.alpha;
    out.ancillas = u.ancillas + v.ancillas;
    out.epsilon = u.alpha * v.epsilon + v.alpha * u.epsilon;
    out.systemDim = n;
    out.ledger = u.ledger + v.ledger;
    out.ledger.gates += 1.0;
    if (u.target && v.target) out.target = (*u.target) * (*v.target);
    return out;
}

BlockEncoding amplify(const BlockEncoding& u, double gamma) {
    if (!(gamma > 0.0) || gamma >= 1.0) fail(ErrorKind::InvalidArgument, "gamma must lie in (0,1)");
    if (u.alpha < 1.0) fail(ErrorKind::Precondition, "amplification needs alpha >= 1");
    if (u.target && spectralNorm(*u.target) > 1.0 + kConstructTol) {
        fail(ErrorKind::NormTooLarge, "target norm exceeds 1");
    }
    ComplexMatrix a = u.extracted();
    if (spectralNorm(a) > 1.0 + u.epsilon + kConstructTol) {
        fail(ErrorKind::NormTooLarge, "encoded matrix norm exceeds 1");
    }
    const double rounds = std::max(1.0, u.alpha * std::log(1.0 / gamma));
    CostLedger l = u.ledger.scaled(rounds);
    l.gates += rounds * (u.ancillas + 1);
    BlockEncoding out = encodeBlock(a / std::sqrt(2.0), std::sqrt(2.0), u.ancillas + 1, u.epsilon + gamma, l);
    out.target = u.target;
    return out;
}

BlockEncoding preamplifiedProduct(const BlockEncoding& u, const BlockEncoding& v, double gamma) {
    if (!(gamma > 0.0)) fail(ErrorKind::InvalidArgument, "gamma must be positive");
    BlockEncoding out = product(amplify(u, gamma / 2.0), amplify(v, gamma / 2.0));
    out.epsilon = std::sqrt(2.0) * (u.epsilon + v.epsilon + gamma);
    return out;
}

BlockEncoding complement(const BlockEncoding& u) {
    const std::size_t n = u.systemDim;
    const std::size_t da = std::size_t{1} << u.ancillas;
    const std::size_t dim = da * 2 * n;
    checkCapacity(2 * dim, "complement");
    // Layout [ancillas][control][system]; controlled-U fires on control = 1.
    // W = C^dagger X C with C controlled-U and X on the control: U above the diagonal, U^dagger below.
    ComplexMatrix w = ComplexMatrix::Zero(dim, dim);
    for (std::size_t a = 0; a < da; ++a)
        for (std::size_t b = 0; b < da; ++b) {
            w.block(a * 2 * n, b * 2 * n + n, n, n) = u.unitary.block(a * n, b * n, n, n);
            w.block(a * 2 * n + n, b * 2 * n, n, n) = u.unitary.block(b * n, a * n, n, n).adjoint();
        }
    BlockEncoding out;
    out.unitary = ComplexMatrix::Zero(2 * dim, 2 * dim);
    out.unitary.topLeftCorner(dim, dim) = w;
    out.unitary.bottomRightCorner(dim, dim) = w;
    out.alpha = u.alpha;
    out.ancillas = u.ancillas + 1;
    out.epsilon = u.epsilon;
    out.systemDim = 2 * n;
    out.ledger = u.ledger.scaled(2.0);
    out.ledger.gates += 2.0 * (u.ancillas + 1) + 1.0;
    if (u.target) {
        ComplexMatrix t = ComplexMatrix::Zero(2 * n, 2 * n);
        t.topRightCorner(n, n) = *u.target;
        t.bottomLeftCorner(n, n) = u.target->adjoint();
        out.target = t;
    }
    return out;
}

BlockEncoding lcu(const std::vector<BlockEncoding>& encodings, const std::vector<double>& coeffs) {
    if (encodings.empty()) fail(ErrorKind::EmptyList, "no encodings");
    if (encodings.size() != coeffs.size()) fail(ErrorKind::DimensionMismatch, "coefficient count");
    const std::size_t n = encodings.front().systemDim;
    int amax = 0;
    for (std::size_t j = 0; j < encodings.size(); ++j) {
        if (encodings[j].systemDim != n) fail(ErrorKind::DimensionMismatch, "system dimensions differ");
        if (!std::isfinite(coeffs[j])) fail(ErrorKind::InvalidArgument, "non-finite coefficient");
        amax = std::max(amax, encodings[j].ancillas);
    }
    const int k = ceilLog2(encodings.size());
    const std::size_t idx = std::size_t{1} << k, blockDim = n << amax, dim = idx * blockDim;
    checkCapacity(dim, "LCU");
    double s = 0.0, eps = 0.0;
    for (std::size_t j = 0; j < encodings.size(); ++j) {
        s += std::abs(coeffs[j]) * encodings[j].alpha;
        eps += std::abs(coeffs[j]) * encodings[j].epsilon;
    }
    if (!(s > 0.0)) fail(ErrorKind::InvalidArgument, "all weights vanish");
    ComplexMatrix prepCol = ComplexMatrix::Zero(idx, 1);
    for (std::size_t j = 0; j < encodings.size(); ++j)
        prepCol(j, 0) = std::sqrt(std::abs(coeffs[j]) * encodings[j].alpha / s);
    ComplexMatrix prep = kron(completeUnitary(prepCol), ComplexMatrix::Identity(blockDim, blockDim));
    ComplexMatrix sel = ComplexMatrix::Identity(dim, dim);
    CostLedger ledger;
    bool haveTargets = true;
    ComplexMatrix tgt = ComplexMatrix::Zero(n, n);
    for (std::size_t j = 0; j < encodings.size(); ++j) {
        const auto& e = encodings[j];
        const std::size_t pad = std::size_t{1} << (amax - e.ancillas);
        const double sign = coeffs[j] < 0.0 ? -1.0 : 1.0;
        sel.block(j * blockDim, j * blockDim, blockDim, blockDim) =
            sign * kron(ComplexMatrix::Identity(pad, pad), e.unitary);
        ledger += e.ledger;
        if (e.target) tgt += coeffs[j] * (*e.target);
        else haveTargets = false;
    }
    ledger.gates += 2.0 * k + 1.0;
    BlockEncoding out;
    out.unitary = prep.adjoint() * sel * prep;
    out.alpha = s;
    out.ancillas = amax + k;
    out.epsilon = eps;
    out.systemDim = n;
    out.ledger = ledger;
    if (haveTargets) out.target = tgt;
    return out;
}

BlockEncoding sharedAncillaProduct(const std::vector<BlockEncoding>& factors) {
    if (factors.empty()) fail(ErrorKind::EmptyList, "no factors");
    const auto& f0 = factors.front();
    BlockEncoding out;
    out.unitary = ComplexMatrix::Identity(f0.unitary.rows(), f0.unitary.cols());
    out.alpha = 1.0;
    out.ancillas = f0.ancillas;
    out.systemDim = f0.systemDim;
    double worst = 0.0;
    bool haveTargets = true;
    ComplexMatrix tgt = ComplexMatrix::Identity(f0.systemDim, f0.systemDim);
    for (const auto& f : factors) {
        if (f.systemDim != f0.systemDim || f.ancillas != f0.ancillas) {
            fail(ErrorKind::DimensionMismatch, "factors must share layout");
        }
        if (std::abs(f.alpha - 1.0) > kConstructTol) fail(ErrorKind::Precondition, "factors need alpha = 1");
        out.unitary = f.unitary * out.unitary;
        worst = std::max(worst, f.epsilon);
        out.ledger += f.ledger;
        if (f.target) tgt = (*f.target) * tgt;
        else haveTargets = false;
    }
    const double k = static_cast<double>(factors.size());
    out.epsilon = 4.0 * k * k * worst;
    if (haveTargets) out.target = tgt;
    return out;
}

ComplexMatrix statePairUnitary(const std::vector<LabelState>& psi, const std::vector<LabelState>& phi,
                               int ancillas) {
    if (psi.size() != phi.size() || psi.empty()) fail(ErrorKind::DimensionMismatch, "state families differ");
    const std::size_t n = psi.size();
    const std::size_t dim = n << ancillas;
    checkCapacity(dim, "state-pair unitary");
    std::map<std::uint64_t, std::size_t> index;
    for (const auto* fam : {&psi, &phi})
        for (const auto& s : *fam)
            for (const auto& [label, amp] : s) index.emplace(label, 0);
    if (index.size() > dim) {
        fail(ErrorKind::Capacity, std::to_string(index.size()) + " labels exceed " + std::to_string(dim) +
                                      " basis states");
    }
    std::size_t next = 0;
    for (auto& [label, pos] : index) pos = next++;
    auto columns = [&](const std::vector<LabelState>& fam) {
        ComplexMatrix v = ComplexMatrix::Zero(dim, n);
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& [label, amp] : fam[i]) v(index.at(label), i) = amp;
        return v;
    };
    ComplexMatrix ur = completeUnitary(columns(psi));
    ComplexMatrix ul = completeUnitary(columns(phi));
    return ur.adjoint() * ul;
}

SparseOracles denseOracles(const ComplexMatrix& a) {
    std::vector<std::vector<long>> rowPos(a.rows()), colPos(a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != cplx(0.0, 0.0)) {
                rowPos[i].push_back(j);
                colPos[j].push_back(i);
            }
    SparseOracles o;
    o.rows = a.rows();
    o.cols = a.cols();
    o.row = [rowPos](std::size_t i, std::size_t k) { return k < rowPos[i].size() ? rowPos[i][k] : -1L; };
    o.col = [colPos](std::size_t j, std::size_t k) { return k < colPos[j].size() ? colPos[j][k] : -1L; };
    o.entry = [a](std::size_t i, std::size_t j) { return a(i, j); };
    return o;
}

BlockEncoding fromSparseAccess(const SparseOracles& o, std::size_t sR, std::size_t sC, double eps) {
    if (sR == 0 || sC == 0) fail(ErrorKind::InvalidArgument, "sparsity must be positive");
    if (eps < 0.0) fail(ErrorKind::InvalidArgument, "negative eps");
    const std::size_t n = std::max(o.rows, o.cols);
    checkCapacity(n, "sparse matrix");
    ComplexMatrix full = ComplexMatrix::Zero(n, n);
    std::vector<std::vector<long>> rowList(o.rows), colList(o.cols);
    for (std::size_t i = 0; i < o.rows; ++i)
        for (std::size_t j = 0; j < o.cols; ++j) {
            full(i, j) = o.entry(i, j);
            if (std::abs(full(i, j)) > 1.0 + kConstructTol) {
                fail(ErrorKind::NormTooLarge, "entry magnitude exceeds 1");
            }
        }
    auto collect = [](const auto& oracle, std::size_t line, std::size_t s, std::size_t bound) {
        std::vector<long> out;
        std::set<long> seen;
        for (std::size_t k = 0; k < s; ++k) {
            long p = oracle(line, k);
            if (p < 0) {
                out.push_back(-1);
                continue;
            }
            if (static_cast<std::size_t>(p) >= bound || !seen.insert(p).second) {
                fail(ErrorKind::SparsityViolation, "oracle returned an invalid or repeated position");
            }
            out.push_back(p);
        }
        return out;
    };
    for (std::size_t i = 0; i < o.rows; ++i) {
        rowList[i] = collect(o.row, i, sR, o.cols);
        for (std::size_t j = 0; j < o.cols; ++j)
            if (full(i, j) != cplx(0.0, 0.0) &&
                std::find(rowList[i].begin(), rowList[i].end(), static_cast<long>(j)) == rowList[i].end()) {
                fail(ErrorKind::SparsityViolation, "row " + std::to_string(i) + " has more than sR nonzeros");
            }
    }
    for (std::size_t j = 0; j < o.cols; ++j) {
        colList[j] = collect(o.col, j, sC, o.rows);
        for (std::size_t i = 0; i < o.rows; ++i)
            if (full(i, j) != cplx(0.0, 0.0) &&
                std::find(colList[j].begin(), colList[j].end(), static_cast<long>(i)) == colList[j].end()) {
                fail(ErrorKind::SparsityViolation, "column " + std::to_string(j) + " has more than sC nonzeros");
            }
    }
    const std::uint64_t width = std::max({n, sR, sC});
    auto label = [width](std::uint64_t f, std::uint64_t u, std::uint64_t v) { return (f * width + u) * width + v; };
    std::vector<LabelState> psi(n), phi(n);
    const double nr = 1.0 / std::sqrt(static_cast<double>(sR)), nc = 1.0 / std::sqrt(static_cast<double>(sC));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t k = 0; k < sR; ++k) {
            long r = x < o.rows ? rowList[x][k] : -1;
            if (r < 0) psi[x][label(2, x, k)] = nr;
            else psi[x][label(0, x, r)] = nr;
        }
    for (std::size_t y = 0; y < n; ++y)
        for (std::size_t k = 0; k < sC; ++k) {
            long c = y < o.cols ? colList[y][k] : -1;
            if (c < 0) {
                phi[y][label(3, y, k)] = nc;
                continue;
            }
            cplx a = full(c, y);
            phi[y][label(0, c, y)] = nc * a;
            double rest = std::sqrt(std::max(0.0, 1.0 - std::norm(a)));
            if (rest > 0.0) phi[y][label(1, c, y)] = nc * rest;
        }
    std::set<std::uint64_t> labels;
    for (const auto* fam : {&psi, &phi})
        for (const auto& s : *fam)
            for (const auto& [l, amp] : s) labels.insert(l);
    int anc = std::max(1, ceilLog2((labels.size() + n - 1) / n));
    BlockEncoding out;
    out.unitary = statePairUnitary(psi, phi, anc);
    out.alpha = std::sqrt(static_cast<double>(sR * sC));
    out.ancillas = anc;
    out.epsilon = eps;
    out.systemDim = n;
    out.ledger.queries = {{"row", 1.0}, {"col", 1.0}, {"entry", 1.0}};
    out.ledger.gates = 2.0 * ceilLog2(n) + anc;
    out.target = full;
    return out;
}

KPStates kpStates(const KPInputs& trees, const MuParams& mu) {
    const KPTree* base = mu.mode == MuMode::Frobenius ? trees.matrix : trees.power;
    if (!base || (mu.mode == MuMode::PNorm && !trees.companion)) {
        fail(ErrorKind::MissingTree, mu.mode == MuMode::Frobenius ? "frobenius mode needs the matrix tree"
                                                                  : "p-norm mode needs both power trees");
    }
    const std::size_t m = base->rows(), nCols = base->cols(), e = m + nCols;
    const std::uint64_t width = e + 1;
    auto label = [width](std::uint64_t x, std::uint64_t y) { return x * width + y; };
    KPStates st;
    st.psi.resize(e);
    st.phi.resize(e);
    st.ancillas = ceilLog2(m + nCols + 1);
    if (mu.mode == MuMode::Frobenius) {
        StateVector norms = base->rowNormState();
        for (std::size_t j = 0; j < m; ++j) {
            if (base->rowNormSquared(j) == 0.0) {
                st.psi[j][label(j, e)] = 1.0;
                st.phi[j][label(e, j)] = 1.0;
                continue;
            }
            StateVector r = base->rowState(j);
            for (std::size_t k = 0; k < nCols; ++k) {
                if (r(k) == cplx(0.0, 0.0)) continue;
                st.psi[j][label(j, m + k)] = r(k);
                st.phi[j][label(m + k, j)] = r(k);
            }
        }
        for (std::size_t k = 0; k < nCols; ++k)
            for (std::size_t j = 0; j < m; ++j) {
                if (norms(j) == cplx(0.0, 0.0)) continue;
                st.psi[m + k][label(m + k, j)] = norms(j);
                st.phi[m + k][label(j, m + k)] = norms(j);
            }
        return st;
    }
    const KPTree& comp = *trees.companion;
    if (comp.rows() != nCols || comp.cols() != m) fail(ErrorKind::DimensionMismatch, "companion tree shape");
    double s = 0.0, sT = 0.0;
    for (std::size_t j = 0; j < m; ++j) s = std::max(s, base->rowNormSquared(j));
    for (std::size_t k = 0; k < nCols; ++k) sT = std::max(sT, comp.rowNormSquared(k));
    if (s == 0.0 || sT == 0.0) fail(ErrorKind::ZeroVector, "stored matrix is zero");
    auto fill = [&](const KPTree& t, std::size_t line, std::size_t offset, std::size_t otherOffset, double smax,
                    LabelState& psiOut, LabelState& phiOut) {
        const double w = t.rowNormSquared(line) / smax;
        if (w > 0.0) {
            StateVector r = t.rowState(line);
            for (std::size_t q = 0; q < t.cols(); ++q) {
                if (r(q) == cplx(0.0, 0.0)) continue;
                psiOut[label(offset + line, otherOffset + q)] = std::sqrt(w) * r(q);
                phiOut[label(otherOffset + q, offset + line)] = std::sqrt(w) * r(q);
            }
        }
        const double rest = std::sqrt(std::max(0.0, 1.0 - w));
        if (rest > 0.0) {
            psiOut[label(offset + line, e)] = rest;
            phiOut[label(e, offset + line)] = rest;
        }
    };
    for (std::size_t j = 0; j < m; ++j) fill(*base, j, 0, m, s, st.psi[j], st.phi[j]);
    for (std::size_t k = 0; k < nCols; ++k) fill(comp, k, m, 0, sT, st.psi[m + k], st.phi[m + k]);
    return st;
}

BlockEncoding fromKP(const KPInputs& trees, const MuParams& mu, double eps) {
    if (eps < 0.0) fail(ErrorKind::InvalidArgument, "negative eps");
    KPStates st = kpStates(trees, mu);
    Eigen::MatrixXd a;
    MuParams check;
    if (mu.mode == MuMode::Frobenius) {
        a = trees.matrix->matrix();
        check = muOf(*trees.matrix);
    } else {
        Eigen::MatrixXd ap = trees.power->matrix(), aq = trees.companion->matrix();
        a = ap.cwiseProduct(aq.transpose());
        check = muOf(trees.power, trees.companion, mu.p);
    }
    if (std::abs(check.value - mu.value) > 1e-12 * std::max(1.0, check.value)) {
        fail(ErrorKind::InvalidArgument, "mu does not match the stored trees");
    }
    const std::size_t m = a.rows(), nCols = a.cols(), dim = m + nCols;
    BlockEncoding out;
    out.unitary = statePairUnitary(st.psi, st.phi, st.ancillas);
    out.alpha = mu.value;
    out.ancillas = st.ancillas;
    out.epsilon = eps;
    out.systemDim = dim;
    out.ledger.queries["kp"] = 2.0;
    out.ledger.gates = 2.0 * (ceilLog2(m) + ceilLog2(nCols) + 2);
    ComplexMatrix t = ComplexMatrix::Zero(dim, dim);
    t.topRightCorner(m, nCols) = a.cast<cplx>();
    t.bottomLeftCorner(nCols, m) = a.transpose().cast<cplx>();
    out.target = t;
    return out;
}

AppliedState applyToState(const BlockEncoding& u, const StateVector& b, double gammaLower, double eps) {
    if (static_cast<std::size_t>(b.size()) != u.systemDim) fail(ErrorKind::DimensionMismatch, "state size");
    if (!(gammaLower > 0.0) || !(eps > 0.0)) fail(ErrorKind::InvalidArgument, "gamma and eps must be positive");
    if (u.epsilon > eps * gammaLower / 2.0 + kConstructTol * eps) {
        fail(ErrorKind::Precondition, "encoding error exceeds eps*gamma/2");
    }
    ComplexMatrix a = u.extracted();
    if (spectralNorm(a) > 1.0 + u.epsilon + kConstructTol) fail(ErrorKind::NormTooLarge, "encoded norm exceeds 1");
    StateVector ab = a * normalized(b);
    const double overlap = ab.norm();
    if (overlap < gammaLower) {
        fail(ErrorKind::GammaViolation, "overlap " + std::to_string(overlap) + " below " + std::to_string(gammaLower));
    }
    const double rounds = std::min(u.alpha / gammaLower, (u.alpha * std::log(1.0 / eps) + 1.0) / gammaLower);
    AppliedState out;
    out.state = ab / overlap;
    out.ledger = u.ledger.scaled(rounds);
    out.ledger.queries["state-prep"] += 1.0 / gammaLower;
    out.successAmplitude = overlap;
    return out;
}

}  // namespace blockenc

#include "blockenc/kp_store.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace blockenc {

namespace {

constexpr char kMagic[8] = {'K', 'P', 'T', 'R', 'E', 'E', '\0', '\0'};
constexpr std::uint32_t kSnapshotVersion = 1;

void writeU64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t readU64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) fail(ErrorKind::Io, "truncated snapshot");
    std::uint64_t v = 0;
    for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    return v;
}

void writeF64(std::ostream& out, double d) {
    std::uint64_t v;
    std::memcpy(&v, &d, 8);
    writeU64(out, v);
}

double readF64(std::istream& in) {
    std::uint64_t v = readU64(in);
    double d;
    std::memcpy(&d, &v, 8);
    return d;
}

}  // namespace

KPTree::KPTree(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), rowLeaves_(nextPow2(cols)), topLeaves_(nextPow2(rows)) {
    if (rows == 0 || cols == 0) fail(ErrorKind::InvalidArgument, "empty tree dimensions");
    checkCapacity(rows * cols, "KP tree");
    rowHeaps_.assign(rows, std::vector<double>(2 * rowLeaves_, 0.0));
    signs_.assign(rows, std::vector<std::int8_t>(rowLeaves_, 1));
    topHeap_.assign(2 * topLeaves_, 0.0);
}

KPTree KPTree::fromMatrix(const Eigen::MatrixXd& a) {
    KPTree t(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) t.insert(i, j, a(i, j));
    return t;
}

KPTree KPTree::fromVector(const Eigen::VectorXd& v) { return fromMatrix(v); }

std::size_t KPTree::insert(std::size_t i, std::size_t j, double v) {
    if (i >= rows_ || j >= cols_) {
        fail(ErrorKind::IndexOutOfRange, "entry (" + std::to_string(i) + "," + std::to_string(j) +
                                             ") outside " + std::to_string(rows_) + "x" +
                                             std::to_string(cols_));
    }
    if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite entry");
    std::size_t touches = 0;
    auto& heap = rowHeaps_[i];
    std::size_t node = rowLeaves_ + j;
    heap[node] = v * v;
    signs_[i][j] = v < 0.0 ? -1 : 1;
    ++touches;
    while (node > 1) {
        node /= 2;
        heap[node] = heap[2 * node] + heap[2 * node + 1];
        ++touches;
    }
    node = topLeaves_ + i;
    topHeap_[node] = heap[1];
    ++touches;
    while (node > 1) {
        node /= 2;
        topHeap_[node] = topHeap_[2 * node] + topHeap_[2 * node + 1];
        ++touches;
    }
    return touches;
}

double KPTree::squaredLeaf(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) fail(ErrorKind::IndexOutOfRange, "leaf index");
    return rowHeaps_[i][rowLeaves_ + j];
}

int KPTree::sign(std::size_t i, std::size_t j) const {
    if (i >= rows_ || j >= cols_) fail(ErrorKind::IndexOutOfRange, "leaf index");
    return signs_[i][j];
}

double KPTree::entry(std::size_t i, std::size_t j) const {
    return sign(i, j) * std::sqrt(squaredLeaf(i, j));
}

double KPTree::rowNormSquared(std::size_t i) const {
    if (i >= rows_) fail(ErrorKind::IndexOutOfRange, "row index");
    return rowHeaps_[i][1];
}

double KPTree::frobeniusSquared() const { return topHeap_[1]; }

double KPTree::topLeaf(std::size_t i) const {
    if (i >= rows_) fail(ErrorKind::IndexOutOfRange, "row index");
    return topHeap_[topLeaves_ + i];
}

Eigen::MatrixXd KPTree::matrix() const {
    Eigen::MatrixXd a(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) a(i, j) = entry(i, j);
    return a;
}

double KPTree::maxNodeDefect() const {
    double worst = 0.0;
    auto scan = [&worst](const std::vector<double>& heap, std::size_t leaves) {
        for (std::size_t n = 1; n < leaves; ++n)
            worst = std::max(worst, std::abs(heap[n] - heap[2 * n] - heap[2 * n + 1]));
    };
    for (const auto& h : rowHeaps_) scan(h, rowLeaves_);
    scan(topHeap_, topLeaves_);
    for (std::size_t i = 0; i < rows_; ++i)
        worst = std::max(worst, std::abs(topHeap_[topLeaves_ + i] - rowHeaps_[i][1]));
    return worst;
}

StateVector KPTree::cascade(const std::vector<double>& heap, std::size_t leaves, std::size_t count,
                            const std::vector<std::int8_t>* signs, std::uint64_t salt) const {
    StateVector s = StateVector::Zero(count);
    for (std::size_t leaf = 0; leaf < count; ++leaf) {
        double amp = 1.0;
        std::size_t node = 1;
        int depth = ceilLog2(leaves);
        for (int level = depth - 1; level >= 0; --level) {
            std::size_t child = 2 * node + ((leaf >> level) & 1U);
            amp *= heap[node] > 0.0 ? std::sqrt(heap[child] / heap[node]) : 0.0;
            node = child;
        }
        s(leaf) = amp * (signs ? (*signs)[leaf] : 1);
    }
    applyPerturbation(s, salt);
    return s;
}

void KPTree::applyPerturbation(StateVector& s, std::uint64_t salt) const {
    if (perturbBound_ <= 0.0) return;
    std::mt19937_64 rng(perturbSeed_ ^ (0x9E3779B97F4A7C15ULL * (salt + 1)));
    std::normal_distribution<double> g(0.0, 1.0);
    StateVector d(s.size());
    for (Eigen::Index k = 0; k < d.size(); ++k) d(k) = g(rng);
    s += perturbBound_ * d / d.norm();
    s /= s.norm();
}

StateVector KPTree::rowState(std::size_t i) const {
    if (i >= rows_) fail(ErrorKind::IndexOutOfRange, "row index");
    if (rowHeaps_[i][1] == 0.0) fail(ErrorKind::ZeroRow, "row " + std::to_string(i) + " is zero");
    return cascade(rowHeaps_[i], rowLeaves_, cols_, &signs_[i], i);
}

StateVector KPTree::rowNormState() const {
    if (topHeap_[1] == 0.0) fail(ErrorKind::ZeroVector, "stored matrix is zero");
    return cascade(topHeap_, topLeaves_, rows_, nullptr, rows_);
}

void KPTree::setPerturbation(double bound, std::uint64_t seed) {
    if (bound < 0.0) fail(ErrorKind::InvalidArgument, "negative perturbation bound");
    perturbBound_ = bound;
    perturbSeed_ = seed;
}

void KPTree::saveSnapshot(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    out.write(kMagic, 8);
    writeU64(out, kSnapshotVersion);
    writeU64(out, rows_);
    writeU64(out, cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (double d : rowHeaps_[i]) writeF64(out, d);
        for (std::size_t j = 0; j < rowLeaves_; ++j) out.put(static_cast<char>(signs_[i][j]));
    }
    for (double d : topHeap_) writeF64(out, d);
}

KPTree KPTree::loadSnapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0) fail(ErrorKind::Io, path + ": bad magic");
    if (readU64(in) != kSnapshotVersion) fail(ErrorKind::Io, path + ": unsupported version");
    std::size_t rows = readU64(in), cols = readU64(in);
    KPTree t(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (double& d : t.rowHeaps_[i]) d = readF64(in);
        for (std::size_t j = 0; j < t.rowLeaves_; ++j) {
            int c = in.get();
            if (c == EOF) fail(ErrorKind::Io, "truncated snapshot");
            t.signs_[i][j] = static_cast<std::int8_t>(static_cast<signed char>(c));
        }
    }
    for (double& d : t.topHeap_) d = readF64(in);
    return t;
}

PrepMaps prepMaps(const KPTree& tree) {
    return {[tree](std::size_t i) { return tree.rowState(i); }, tree.rowNormState()};
}

StateVector vectorState(const KPTree& tree) {
    if (tree.cols() != 1) fail(ErrorKind::DimensionMismatch, "vectorState needs an M x 1 tree");
    StateVector s = tree.rowNormState();
    for (std::size_t i = 0; i < tree.rows(); ++i) s(i) *= tree.sign(i, 0);
    return s;
}

std::pair<KPTree, KPTree> powerTrees(const Eigen::MatrixXd& a, double p) {
    if (p < 0.0 || p > 1.0) fail(ErrorKind::OutOfRange, "p must lie in [0,1]");
    Eigen::MatrixXd ap(a.rows(), a.cols()), aq(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            double m = std::abs(a(i, j));
            double s = a(i, j) < 0.0 ? -1.0 : 1.0;
            ap(i, j) = m == 0.0 ? 0.0 : s * std::pow(m, p);
            aq(j, i) = m == 0.0 ? 0.0 : std::pow(m, 1.0 - p);
        }
    return {KPTree::fromMatrix(ap), KPTree::fromMatrix(aq)};
}

MuParams muOf(const KPTree& tree) {
    return {MuMode::Frobenius, 0.0, std::sqrt(tree.frobeniusSquared())};
}

MuParams muOf(const KPTree* pTree, const KPTree* companion, double p) {
    if (p < 0.0 || p > 1.0) fail(ErrorKind::OutOfRange, "p must lie in [0,1]");
    if (!pTree || !companion) fail(ErrorKind::MissingTree, "p-norm mode needs both power trees");
    auto maxRow = [](const KPTree& t) {
        double m = 0.0;
        for (std::size_t i = 0; i < t.rows(); ++i) m = std::max(m, t.rowNormSquared(i));
        return m;
    };
    return {MuMode::PNorm, p, std::sqrt(maxRow(*pTree) * maxRow(*companion))};
}

}  // namespace blockenc

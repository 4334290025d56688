#include "blockenc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace blockenc {

const char* errorKindName(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidArgument: return "invalid-argument";
        case ErrorKind::DimensionMismatch: return "dimension-mismatch";
        case ErrorKind::IndexOutOfRange: return "index-out-of-range";
        case ErrorKind::Capacity: return "capacity-exceeded";
        case ErrorKind::NormTooLarge: return "norm-too-large";
        case ErrorKind::AlphaTooSmall: return "alpha-too-small";
        case ErrorKind::ZeroRow: return "zero-row";
        case ErrorKind::ZeroVector: return "zero-vector";
        case ErrorKind::MissingTree: return "missing-tree";
        case ErrorKind::SparsityViolation: return "sparsity-violation";
        case ErrorKind::EmptyList: return "empty-list";
        case ErrorKind::GammaViolation: return "gamma-violation";
        case ErrorKind::Precondition: return "precondition";
        case ErrorKind::InputTooNoisy: return "input-too-noisy";
        case ErrorKind::NotPowerOfTwo: return "M-not-power-of-two";
        case ErrorKind::SpectrumOutsideRadius: return "spectrum-outside-radius";
        case ErrorKind::SpectrumViolation: return "spectrum-violation";
        case ErrorKind::OutOfRange: return "out-of-range";
        case ErrorKind::PhiOutOfRange: return "phi-out-of-range";
        case ErrorKind::OverAmplification: return "overamplification-precondition";
        case ErrorKind::SuccessBound: return "success-bound-violation";
        case ErrorKind::SpanViolation: return "span-violation";
        case ErrorKind::OverlapViolation: return "overlap-violation";
        case ErrorKind::ResidualViolation: return "residual-violation";
        case ErrorKind::MissingStorage: return "missing-storage";
        case ErrorKind::GapViolation: return "gap-violation";
        case ErrorKind::SameVertex: return "same-vertex";
        case ErrorKind::DisconnectedGraph: return "disconnected-graph";
        case ErrorKind::WeightOutOfRange: return "weight-out-of-range";
        case ErrorKind::Numerical: return "numerical";
        case ErrorKind::Config: return "config-invalid";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(errorKindName(kind)) + ": " + what), kind_(kind) {}

bool Error::isContract() const noexcept {
    return kind_ != ErrorKind::Numerical && kind_ != ErrorKind::Config && kind_ != ErrorKind::Io;
}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

int maxQubits() {
    const char* env = std::getenv("BLOCKENC_MAX_QUBITS");
    if (!env) return 14;
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end == env || v <= 0) return 14;
    return static_cast<int>(std::min<long>(v, 20));
}

void checkCapacity(std::size_t dim, const char* what) {
    if (dim == 0) fail(ErrorKind::InvalidArgument, std::string(what) + " has zero dimension");
    const std::size_t cap = std::size_t{1} << maxQubits();
    if (dim > cap) {
        fail(ErrorKind::Capacity, std::string(what) + " dimension " + std::to_string(dim) +
                                      " exceeds " + std::to_string(maxQubits()) + " qubits");
    }
}

int ceilLog2(std::size_t n) {
    int k = 0;
    while ((std::size_t{1} << k) < n) ++k;
    return k;
}

std::size_t nextPow2(std::size_t n) { return std::size_t{1} << ceilLog2(n); }

double binomialUpperTail(int n, int kmin, double p) {
    if (p <= 0.0) return kmin <= 0 ? 1.0 : 0.0;
    if (p >= 1.0) return kmin <= n ? 1.0 : 0.0;
    double total = 0.0;
    const double lp = std::log(p), lq = std::log1p(-p);
    for (int k = kmin; k <= n; ++k) {
        const double lc = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
        total += std::exp(lc + k * lp + (n - k) * lq);
    }
    return std::min(total, 1.0);
}

SVDDecomposition svd(const ComplexMatrix& a) {
    Eigen::JacobiSVD<ComplexMatrix> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return {s.matrixU(), s.singularValues(), s.matrixV()};
}

double spectralNorm(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<ComplexMatrix> s(a);
    return s.singularValues()(0);
}

ComplexMatrix pseudoinverse(const ComplexMatrix& a, double tol) {
    auto d = svd(a);
    ComplexMatrix out = ComplexMatrix::Zero(a.cols(), a.rows());
    for (Eigen::Index i = 0; i < d.singularValues.size(); ++i) {
        double s = d.singularValues(i);
        if (s > tol) out += (1.0 / s) * d.rightVectors.col(i) * d.leftVectors.col(i).adjoint();
    }
    return out;
}

ComplexMatrix hermitianPart(const ComplexMatrix& h) {
    if (h.rows() != h.cols()) fail(ErrorKind::DimensionMismatch, "matrix is not square");
    return 0.5 * (h + h.adjoint());
}

ComplexMatrix hermitianExp(const ComplexMatrix& h, double t) {
    return hermitianFunction(h, [t](double x) { return std::exp(cplx(0.0, t * x)); });
}

ComplexMatrix psdSqrt(const ComplexMatrix& h) {
    return hermitianFunction(h, [](double x) { return cplx(std::sqrt(std::max(x, 0.0)), 0.0); });
}

ComplexMatrix unitaryDilation(const ComplexMatrix& b) {
    Eigen::JacobiSVD<ComplexMatrix> s(b, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const RealVector& sv = s.singularValues();
    if (sv.size() > 0 && sv(0) > 1.0 + kConstructTol) {
        fail(ErrorKind::NormTooLarge, "dilation input has norm " + std::to_string(sv(0)));
    }
    const Eigen::Index r = b.rows(), c = b.cols();
    auto defect = [&sv](Eigen::Index n) {
        RealVector d = RealVector::Ones(n);
        for (Eigen::Index i = 0; i < sv.size(); ++i) d(i) = std::sqrt(std::max(0.0, (1.0 - sv(i)) * (1.0 + sv(i))));
        return d;
    };
    const ComplexMatrix& u = s.matrixU();
    const ComplexMatrix& v = s.matrixV();
    ComplexMatrix out(r + c, r + c);
    out.topLeftCorner(r, c) = b;
    out.topRightCorner(r, r) = u * defect(r).cast<cplx>().asDiagonal() * u.adjoint();
    out.bottomLeftCorner(c, c) = v * defect(c).cast<cplx>().asDiagonal() * v.adjoint();
    out.bottomRightCorner(c, r) = -b.adjoint();
    return out;
}

ComplexMatrix completeUnitary(const ComplexMatrix& v) {
    const Eigen::Index d = v.rows(), n = v.cols();
    if (n > d) fail(ErrorKind::DimensionMismatch, "more columns than rows");
    ComplexMatrix gram = v.adjoint() * v - ComplexMatrix::Identity(n, n);
    if (gram.norm() > 1e-9) fail(ErrorKind::Numerical, "columns are not orthonormal");
    Eigen::HouseholderQR<ComplexMatrix> qr(v);
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(d, d);
    q.leftCols(n) = v;
    return q;
}

bool isUnitary(const ComplexMatrix& u, double tol) {
    if (u.rows() != u.cols()) return false;
    return spectralNorm(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())) <= tol;
}

StateVector normalized(const StateVector& v) {
    double n = v.norm();
    if (n == 0.0) fail(ErrorKind::ZeroVector, "cannot normalize a zero vector");
    return v / n;
}

double fidelity(const StateVector& a, const StateVector& b) {
    if (a.size() != b.size()) fail(ErrorKind::DimensionMismatch, "state dimensions differ");
    return std::norm(normalized(a).dot(normalized(b)));
}

double traceDistance(const StateVector& a, const StateVector& b) {
    return std::sqrt(std::max(0.0, 1.0 - fidelity(a, b)));
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

ComplexMatrix readMatrixMarket(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open " + path);
    std::string line;
    std::getline(in, line);
    std::string lower = line;
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower.rfind("%%matrixmarket", 0) != 0 || lower.find("coordinate") == std::string::npos) {
        fail(ErrorKind::Io, path + ": not a Matrix Market coordinate file");
    }
    const bool complexField = lower.find("complex") != std::string::npos;
    const bool symmetric = lower.find("symmetric") != std::string::npos;
    const bool hermitian = lower.find("hermitian") != std::string::npos;
    while (std::getline(in, line) && (line.empty() || line[0] == '%')) {}
    std::istringstream hdr(line);
    long rows = 0, cols = 0, nnz = 0;
    if (!(hdr >> rows >> cols >> nnz) || rows <= 0 || cols <= 0) {
        fail(ErrorKind::Io, path + ": bad size line");
    }
    ComplexMatrix a = ComplexMatrix::Zero(rows, cols);
    for (long k = 0; k < nnz; ++k) {
        long i = 0, j = 0;
        double re = 0.0, im = 0.0;
        if (!(in >> i >> j >> re)) fail(ErrorKind::Io, path + ": truncated entry list");
        if (complexField && !(in >> im)) fail(ErrorKind::Io, path + ": missing imaginary part");
        if (i < 1 || j < 1 || i > rows || j > cols) fail(ErrorKind::Io, path + ": index out of range");
        cplx v(re, im);
        a(i - 1, j - 1) = v;
        if ((symmetric || hermitian) && i != j) a(j - 1, i - 1) = hermitian ? std::conj(v) : v;
    }
    if (!a.allFinite()) fail(ErrorKind::Io, path + ": non-finite entry");
    return a;
}

void writeMatrixMarket(const std::string& path, const ComplexMatrix& a) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    const bool isComplex = (a.imag().array() != 0.0).any();
    long nnz = 0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            if (a(i, j) != cplx(0.0, 0.0)) ++nnz;
    out << "%%MatrixMarket matrix coordinate " << (isComplex ? "complex" : "real") << " general\n";
    out << a.rows() << ' ' << a.cols() << ' ' << nnz << '\n';
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) {
            if (a(i, j) == cplx(0.0, 0.0)) continue;
            out << i + 1 << ' ' << j + 1 << ' ' << a(i, j).real();
            if (isComplex) out << ' ' << a(i, j).imag();
            out << '\n';
        }
}

}  // namespace blockenc

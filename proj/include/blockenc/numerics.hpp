#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockenc {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kConstructTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-9;

enum class ErrorKind {
    // contract violations
    InvalidArgument,
    DimensionMismatch,
    IndexOutOfRange,
    Capacity,
    NormTooLarge,
    AlphaTooSmall,
    ZeroRow,
    ZeroVector,
    MissingTree,
    SparsityViolation,
    EmptyList,
    GammaViolation,
    Precondition,
    InputTooNoisy,
    NotPowerOfTwo,
    SpectrumOutsideRadius,
    SpectrumViolation,
    OutOfRange,
    PhiOutOfRange,
    OverAmplification,
    SuccessBound,
    SpanViolation,
    OverlapViolation,
    ResidualViolation,
    MissingStorage,
    GapViolation,
    SameVertex,
    DisconnectedGraph,
    WeightOutOfRange,
    // numerical failures
    Numerical,
    // configuration / io
    Config,
    Io,
};

const char* errorKindName(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what);
    ErrorKind kind() const noexcept { return kind_; }
    bool isContract() const noexcept;

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

// Qubit budget for any simulated register (BLOCKENC_MAX_QUBITS, hard cap 20).
int maxQubits();
void checkCapacity(std::size_t dim, const char* what);

int ceilLog2(std::size_t n);
std::size_t nextPow2(std::size_t n);
// P(X >= kmin) for X ~ Binomial(n, p).
double binomialUpperTail(int n, int kmin, double p);

struct SVDDecomposition {
    ComplexMatrix leftVectors;
    RealVector singularValues;
    ComplexMatrix rightVectors;
};

SVDDecomposition svd(const ComplexMatrix& a);
double spectralNorm(const ComplexMatrix& a);
ComplexMatrix pseudoinverse(const ComplexMatrix& a, double tol = 1e-10);

ComplexMatrix hermitianPart(const ComplexMatrix& h);
ComplexMatrix hermitianExp(const ComplexMatrix& h, double t);

// Applies f to the eigenvalues of the symmetrized input.
template <class F>
ComplexMatrix hermitianFunction(const ComplexMatrix& h, F&& f) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(hermitianPart(h));
    const auto& ev = es.eigenvalues();
    Eigen::VectorXcd d(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) d(i) = f(ev(i));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

ComplexMatrix psdSqrt(const ComplexMatrix& h);
ComplexMatrix unitaryDilation(const ComplexMatrix& b);

// Extends n orthonormal columns to a unitary whose leading columns are exactly v.
ComplexMatrix completeUnitary(const ComplexMatrix& v);

bool isUnitary(const ComplexMatrix& u, double tol = kUnitaryTol);
StateVector normalized(const StateVector& v);
double fidelity(const StateVector& a, const StateVector& b);
double traceDistance(const StateVector& a, const StateVector& b);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix readMatrixMarket(const std::string& path);
void writeMatrixMarket(const std::string& path, const ComplexMatrix& a);

}  // namespace blockenc

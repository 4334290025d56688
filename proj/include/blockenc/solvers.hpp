#pragma once

#include "blockenc/block_encoding.hpp"
#include "blockenc/kp_store.hpp"
#include "blockenc/variable_time.hpp"

#include <random>
#include <string>

namespace blockenc {

// Ahat = [[0, A], [A^dagger, 0]].
ComplexMatrix hermitianDilation(const ComplexMatrix& a);

enum class SVEScale { TwoPi, Pi };

struct SVEConfig {
    double Delta = 0.1;
    double eps = 0.1;
    long T = 0;
    int repetitions = 0;
    SVEScale scale = SVEScale::TwoPi;

    void validate() const;
};

// T is the smallest odd integer >= 3 pi / Delta.
SVEConfig makeSVEConfig(double Delta, double eps, SVEScale scale = SVEScale::TwoPi);

// D_n(x) = sum_{t=-n}^{n} e^{itx}.
double dirichletKernel(long n, double x);

struct SVEBranch {
    double sigma = 0.0;
    double weight = 0.0;
    double beta2 = 0.0;
    // Good-branch distribution over |z|, index 0..(T-1)/2.
    std::vector<double> absZ;
    long zStar = 0;
    double peakMass = 0.0;
    double successProbability = 0.0;
};

struct SVEResult {
    SVEConfig cfg;
    std::vector<SVEBranch> branches;
    CostLedger ledger;

    double estimateOf(long absZ) const;
    // Median over the repetitions that landed in the good branch; NaN when none did.
    double sampleEstimate(std::size_t branch, std::mt19937_64& rng) const;
};

SVEResult singularValueEstimation(const BlockEncoding& uA, const StateVector& psi, const SVEConfig& cfg);

struct QLSConfig {
    double kappa = 2.0;
    double eps = 0.01;
    int stages = 0;
    double alphaMax = 0.0;
    double epsPrime = 0.0;
    double gammaLower = 1.0;
    double power = 1.0;
    double delta = 0.1;

    void validate() const;
};

QLSConfig makeQLSConfig(double kappa, double eps, double gammaLower = 1.0, double power = 1.0);

// x^{-c} with sign on |x| >= lambda, linear continuation x lambda^{-c-1} inside.
double powerPatch(double x, double lambda, double c);

struct QLSResult {
    StateVector state;
    VSTA vsta;
    VTAAResult vtaa;
    CostLedger ledger;
    double buildQueries = 0.0;
    bool wrapped = false;
    QLSConfig cfg;
};

// Cost of stage j (1-based): gapped phase estimation at 2^-j plus the patch.
CostLedger qlsStageLedger(const BlockEncoding& uH, const QLSConfig& cfg, int j);

QLSResult qlsSolve(const BlockEncoding& uH, const StateVector& b, const QLSConfig& cfg);

StateVector directSolve(const ComplexMatrix& h, const StateVector& b, double power = 1.0);

QLSResult pseudoinverseState(const BlockEncoding& uH, const StateVector& psi, double kappa, double gammaLower,
                             double eps);

struct NormEstimate {
    double gamma = 0.0;
    double reference = 0.0;
    double runQueries = 0.0;
    double estimationQueries = 0.0;
};

NormEstimate qlsNormEstimate(const BlockEncoding& uH, const StateVector& psi, double kappa, double gammaLower,
                             double eps, double delta, std::mt19937_64& rng);

QLSResult negativePowerSolve(const BlockEncoding& uH, const StateVector& psi, double c, double kappa, double eps);
NormEstimate negativePowerNorm(const BlockEncoding& uH, const StateVector& psi, double c, double kappa, double eps,
                               double delta, std::mt19937_64& rng);

struct DataStructureSolve {
    QLSResult qls;
    StateVector state;
    MuParams mu;
};

DataStructureSolve qlsFromDataStructure(const KPTree& treeA, const KPTree& treeB, MuMode mode, double p,
                                        double kappa, double eps);

// Inverse encoding followed by plain amplitude amplification with the worst-case overlap bound.
AppliedState naiveInverseState(const BlockEncoding& uH, const StateVector& b, double kappa, double eps);

std::string solverReport(const std::string& digest, double fidelity, double estimate, double reference,
                         const CostLedger& ledger);

}  // namespace blockenc

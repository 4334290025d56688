#pragma once

#include "blockenc/block_encoding.hpp"

#include <functional>
#include <optional>

namespace blockenc {

// Query count charged for simulating exp(iHt) from an alpha-normalized encoding.
double hamSimQueries(double alpha, double t, double eps);

BlockEncoding blockHamSim(const BlockEncoding& uH, double t, double eps);

// Signed value of a (J+1)-bit control index: bit J carries weight -2^J.
long signedIndex(std::size_t u, int J);

// Sum over m in [-M, M) of |m><m| (x) exp(i m gamma H), control register most significant.
BlockEncoding controlledHamSim(const BlockEncoding& uH, std::size_t M, double gamma, double eps);
CostLedger controlledHamSimCost(const BlockEncoding& uH, std::size_t M, double gamma, double eps);

struct TaylorSeries {
    double center = 0.0;
    double radius = 1.0;
    double tailBudget = 1.0;
    double envelope = 1.0;
    std::function<double(int)> coefficient;
    std::optional<int> degree;
    // Closed form of sum |a_l| (r + delta)^l when known.
    std::optional<double> envelopeClosedForm;
    // Reference function, used only to attach targets.
    std::function<double(double)> exact;

    int truncationDegree(double epsPrime) const;
    double partialEnvelope(int d) const;
    // Partial sum at the truncation degree plus a tail bound.
    double envelopeBound(double epsPrime) const;
    double evaluate(double x, int d) const;
};

TaylorSeries fromPolynomial(double center, double radius, double tailBudget, double envelope,
                            std::vector<double> coeffs);

BlockEncoding smoothFunction(const BlockEncoding& uH, const TaylorSeries& series, double epsPrime);

enum class PowerPath { Series, Spectral };

TaylorSeries negativePowerSeries(double c, double kappa);
TaylorSeries positivePowerSeries(double c, double kappa);

BlockEncoding negativePower(const BlockEncoding& uH, double c, double kappa, double eps,
                            PowerPath path = PowerPath::Series);
BlockEncoding positivePower(const BlockEncoding& uH, double c, double kappa, double eps,
                            PowerPath path = PowerPath::Series);

// Inverse on |x| >= lambda, linear continuation x / lambda^2 inside the gap.
double patchFunction(double x, double lambda);

// W acting on flag (x) Q (x) system, flag most significant.
struct FlaggedUnitary {
    ComplexMatrix unitary;
    double alphaMax = 1.0;
    int qubitsQ = 0;
    std::size_t systemDim = 0;
    double epsilon = 0.0;
    CostLedger ledger;

    // Component on |1>_F |0>_Q after applying W to |0>_F |0>_Q |psi>.
    StateVector flagged(const StateVector& psi) const;
};

double patchQueries(double alpha, double lambda, double eps);

FlaggedUnitary inversionPatch(const BlockEncoding& uH, double lambda, double eps,
                              std::optional<double> alphaMax = std::nullopt);

}  // namespace blockenc

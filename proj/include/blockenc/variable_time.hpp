#pragma once

#include "blockenc/block_encoding.hpp"

#include <random>
#include <string>
#include <vector>

namespace blockenc {

// Closed-form amplitude after k rounds of amplitude amplification.
double aaAmplitude(double alpha, int k);
double aaLowerBound(double alpha, int k);

// Applies k Grover iterates -(I - 2|s><s|)(I - 2P) to s.
StateVector aaAmplify(const StateVector& s, const ComplexMatrix& projector, int k);

struct RatioCheck {
    double ratio = 1.0;
    double bound = 1.0;
    bool holds = true;
};
RatioCheck amplificationRatioCheck(double alpha, int k);

struct AmplitudeEstimate {
    double estimate = 0.0;
    bool belowThreshold = true;
    double threshold = 0.0;
    int points = 0;
    int repetitions = 0;
    double cost = 0.0;
};

int medianRepetitions(double delta);

// Median-boosted estimate with 2^(j+2) evaluation points; verdict compares against 2^-j.
AmplitudeEstimate amplitudeEstimate(double amplitude, int j, double delta, double runCost, std::mt19937_64& rng);
AmplitudeEstimate amplitudeEstimateWithPoints(double amplitude, int points, double delta, double runCost,
                                              std::mt19937_64& rng);

struct GPEBranch {
    double alpha0 = 1.0;
    double alpha1 = 0.0;
    int points = 0;
    int repetitions = 0;
    int registerQubits = 0;
};

GPEBranch gappedPhaseEstimation(double lambda, double phi, double eps);

namespace detail {
// Same model without the phi range check.
GPEBranch gpeSplit(double lambda, double phi, double eps);
}

CostLedger gpeCost(const BlockEncoding& uH, double phi, double eps);

// Branch-level description: input components along orthonormal branch vectors, per-stage stop
// probabilities and flagged good amplitudes.
struct VariableStoppingTimeAlgorithm {
    std::vector<double> stoppingTimes;
    ComplexMatrix branchBasis;
    Eigen::MatrixXd stopProbability;
    Eigen::MatrixXcd goodAmplitude;

    std::size_t stages() const { return stoppingTimes.size(); }
    std::size_t branches() const { return static_cast<std::size_t>(branchBasis.cols()); }
    void validate() const;
};
using VSTA = VariableStoppingTimeAlgorithm;

VSTA toyVSTA(const std::vector<double>& times, const std::vector<double>& pGood, const std::vector<double>& pBad);

struct BranchState {
    Eigen::MatrixXcd good;
    Eigen::MatrixXd bad;
    StateVector cont;
    std::size_t stagesApplied = 0;

    double maybeGoodNorm() const;
    double goodNorm() const;
    double totalNorm() const;
};

BranchState initialBranchState(const VSTA& vsta, const StateVector& input);
void applyStage(const VSTA& vsta, BranchState& state);
void amplifyMaybeGood(BranchState& state, int k);

struct StoppingProfile {
    std::vector<double> pStopAt;
    std::vector<double> pMaybeGood;
    double pSucc = 0.0;
    double tNorm2 = 0.0;

    std::string json() const;
};

StoppingProfile stoppingProfile(const VSTA& vsta, const StateVector& input);

struct AmplificationSchedule {
    std::vector<int> steps;
    std::vector<double> preAmplitude;
    std::vector<double> postAmplitude;
    std::vector<double> target;
    std::vector<double> amplification;
    std::vector<double> multiplier;
    std::vector<double> overhead;
    std::vector<std::string> notes;
    double E = 1.0;
    double G = 0.0;
    double O = 1.0;
    double C = 0.0;

    bool empty() const;
    std::string json() const;
};

double stageTarget(std::size_t j, std::size_t m);

struct VTAAResult {
    BranchState state;
    AmplificationSchedule schedule;
    StoppingProfile profile;
    double runCost = 0.0;
    double buildCost = 0.0;
    // Uses of the first segment, i.e. input preparations.
    double preparations = 1.0;
};

VTAAResult buildVTAA(const VSTA& vsta, const StateVector& input, double pSuccLower, double delta);

// E * O * (T_max + (t_1 + ||T||_2 sqrt(ln(T_max / t_1))) / sqrt(p_succ)).
double vtaaCostBound(const VTAAResult& r, const VSTA& vsta);

// Good-flagged components of the amplified and original runs as flat vectors.
StateVector goodComponent(const BranchState& state);
StateVector originalGoodComponent(const VSTA& vsta, const StateVector& input);

// Coherent merge over clock values after uncomputation, in the system basis.
StateVector mergedGoodState(const VSTA& vsta, const BranchState& state);

// Regroups stopping times onto a doubling grid.
VSTA sparsify(const VSTA& vsta);

struct MindfulResult {
    VTAAResult vtaa;
    double gamma = 1.0;
    double exactGain = 1.0;
    double amplitudeEstimate = 0.0;
    double normEstimate = 0.0;
    double estimationCost = 0.0;
};

MindfulResult mindfulAmplify(const VSTA& vsta, const StateVector& input, double eps, double delta,
                             double pSuccLower, std::mt19937_64& rng);

}  // namespace blockenc

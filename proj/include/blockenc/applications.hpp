#pragma once

#include "blockenc/solvers.hpp"

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace blockenc {

// X is M x N with M >= N. weights are the diagonal of W (each >= 1); omega is the covariance.
// kappaA bounds the condition number of the solved operator: sqrt(W) X for WLS, X for GLS.
struct RegressionProblem {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::optional<Eigen::VectorXd> weights;
    std::optional<Eigen::MatrixXd> omega;
    double kappaA = 2.0;
    double kappaOmega = 1.0;
    double eta = 0.5;

    void validate() const;
};

// Whitened design and target: sqrt(W) X and sqrt(W) y, or Omega^{-1/2} X and Omega^{-1/2} y.
Eigen::MatrixXd whitenedDesign(const RegressionProblem& p);
Eigen::VectorXd whitenedTarget(const RegressionProblem& p);

// 1 - ||Pi_col(A) b||^2 with b the normalized whitened target.
double residualStats(const RegressionProblem& p);

// Classical normal equations (X^T W X)^{-1} X^T W y or (X^T Omega^{-1} X)^{-1} X^T Omega^{-1} y.
Eigen::VectorXd normalEquationsSolution(const RegressionProblem& p);

enum class WLSRoute { KPOnA, KPOnXWeights, Sparse };
enum class GLSRoute { OmegaInverseSqrt, Omega, KP, Sparse };

struct RegressionResult {
    StateVector state;
    double gammaLower = 0.0;
    double overlap = 0.0;
    double kappa = 0.0;
    CostLedger ledger;
};

RegressionResult wlsSolve(const RegressionProblem& p, WLSRoute route, double eps);
RegressionResult glsSolve(const RegressionProblem& p, GLSRoute route, double eps);

// Reads {"X": path, "y": path, "weights"?: path, "omega"?: path, "kappa", "kappaOmega"?, "eta"};
// paths are Matrix Market files relative to the JSON file.
RegressionProblem loadRegressionProblem(const std::string& path);

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double w = 1.0;
};

struct ElectricalNetwork {
    std::size_t vertices = 0;
    std::vector<Edge> edges;
    Eigen::MatrixXd incidence;
    Eigen::VectorXd weights;
    Eigen::MatrixXd C;
    Eigen::MatrixXd laplacian;
    Eigen::MatrixXd normalizedLaplacian;
    double lambda2 = 0.0;
    double wMax = 1.0;
    std::size_t maxDegree = 0;
};

ElectricalNetwork buildNetwork(const std::vector<Edge>& edges, std::optional<double> wMax = std::nullopt);

// Whitespace text, one "u v w" triple per line; '#' starts a comment.
std::vector<Edge> parseEdgeList(std::istream& in);

struct ExternalCurrent {
    Eigen::VectorXd values;

    double norm() const { return values.norm(); }
    void validate(std::size_t vertices) const;
    static ExternalCurrent between(std::size_t vertices, std::size_t s, std::size_t t);
};

enum class NetworkRoute { Dense, Sparse };

struct NetworkEstimate {
    double estimate = 0.0;
    double reference = 0.0;
    double kappa = 0.0;
    double normEstimate = 0.0;
    CostLedger ledger;
};

// sqrt(2 d wMax / lambda).
double networkKappa(const ElectricalNetwork& net, double lambda);

// Max deviation of [[0,C],[C^T,0]]^+ (i;0) from (0; W^{-1/2} i) where i is the induced edge current.
double pseudoinverseIdentityError(const ElectricalNetwork& net, const ExternalCurrent& iExt);

// Classical ||C^+ i_ext||^2 through the Laplacian pseudoinverse.
double dissipatedPowerReference(const ElectricalNetwork& net, const ExternalCurrent& iExt);

NetworkEstimate dissipatedPower(const ElectricalNetwork& net, const ExternalCurrent& iExt, NetworkRoute route,
                                double eps, double delta, std::mt19937_64& rng,
                                std::optional<double> lambda = std::nullopt);

NetworkEstimate effectiveResistance(const ElectricalNetwork& net, std::size_t s, std::size_t t, double eps,
                                    double delta, std::mt19937_64& rng, NetworkRoute route = NetworkRoute::Dense);

}  // namespace blockenc

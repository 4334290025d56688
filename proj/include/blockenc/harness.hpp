#pragma once

#include "blockenc/applications.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace blockenc {

enum class Task { Encode, HamSim, SVE, QLS, Power, WLS, GLS, Network };

const char* taskName(Task t);
Task parseTask(const std::string& name);

// Input paths are keyed by role: matrix, vector, edges, problem. With no inputs a built-in fixture is used.
struct ExperimentConfig {
    Task task = Task::QLS;
    std::map<std::string, std::string> inputs;
    std::string fixture;
    std::string route;
    std::optional<double> kappa;
    std::optional<double> epsilon;
    std::optional<double> delta;
    std::optional<double> p;
    std::optional<double> c;
    std::optional<double> lambda;
    std::optional<double> time;
    std::optional<double> Delta;
    MuMode muMode = MuMode::Frobenius;
    bool positive = false;
    std::optional<std::size_t> source;
    std::optional<std::size_t> sink;
    std::uint64_t seed = 0;
    std::string output;

    void validate() const;
    // Canonical form; the output path is left out so it does not change the digest.
    nlohmann::json json() const;
    std::string digest() const;
};

// Relative input paths resolve against baseDir.
ExperimentConfig configFromJson(const nlohmann::json& j, const std::string& baseDir = "");
ExperimentConfig loadExperimentConfig(const std::string& path);

struct RunReport {
    std::string task;
    std::string digest;
    std::string instance;
    std::uint64_t seed = 0;
    double estimate = 0.0;
    double reference = 0.0;
    double fidelity = 0.0;
    double relativeError = 0.0;
    double kappa = 0.0;
    double epsilon = 0.0;
    CostLedger ledger;
    double wallSeconds = 0.0;

    // Wall time is kept out so reports are byte-identical across runs.
    std::string json() const;
};

RunReport runExperiment(const ExperimentConfig& cfg);

// 0 ok, 1 configuration or io, 2 contract violation, 3 numerical failure.
int exitCodeFor(const Error& e);

enum class SweepFamily { VTAAKappa, NaiveKappa, Epsilon };

SweepFamily parseSweepFamily(const std::string& name);
const char* sweepFamilyName(SweepFamily f);

struct SweepConfig {
    SweepFamily family = SweepFamily::VTAAKappa;
    std::vector<double> kappas{4, 8, 16, 32, 64};
    std::vector<double> epsilons{1e-3};
    std::uint64_t seed = 0;
    unsigned threads = 0;

    void validate() const;
};

SweepConfig sweepFromJson(const nlohmann::json& j);

struct SweepRow {
    std::string instance;
    double kappa = 0.0;
    double epsilon = 0.0;
    double queries = 0.0;
    double gates = 0.0;
    double fidelity = 0.0;
    double estimate = 0.0;
    double reference = 0.0;
    std::uint64_t seed = 0;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    // Root mean square of the log-space residuals.
    double residual = 0.0;
    std::size_t points = 0;
};

SlopeFit fitLogLog(const std::vector<double>& x, const std::vector<double>& y);

struct SweepResult {
    SweepConfig cfg;
    std::vector<SweepRow> rows;
    SlopeFit fit;
    // queries at the smallest epsilon over queries at the largest.
    double ratio = 1.0;

    std::string csv() const;
    std::string summaryJson() const;
};

// Family instance: diag(1, 1/kappa) with b on the small eigenvalue.
SweepResult scalingSweep(const SweepConfig& cfg);

}  // namespace blockenc

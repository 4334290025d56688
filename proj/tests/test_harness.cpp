#include "blockenc/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

using namespace blockenc;

namespace {

std::optional<ErrorKind> kindOf(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

ExperimentConfig cfgOf(const char* text) { return configFromJson(nlohmann::json::parse(text)); }

}  // namespace

TEST_CASE("task names round trip") {
    for (Task t : {Task::Encode, Task::HamSim, Task::SVE, Task::QLS, Task::Power, Task::WLS, Task::GLS, Task::Network})
        CHECK(parseTask(taskName(t)) == t);
    CHECK(kindOf([] { parseTask("fft"); }) == ErrorKind::Config);
}

TEST_CASE("config parsing and validation") {
    auto c = cfgOf(R"({"task": "qls", "kappa": 4, "epsilon": 0.001, "seed": 9, "fixture": "diag"})");
    CHECK(c.task == Task::QLS);
    CHECK(*c.kappa == 4.0);
    CHECK(c.seed == 9);
    CHECK(c.muMode == MuMode::Frobenius);
    CHECK(kindOf([] { cfgOf(R"({"kappa": 4})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "qls", "epsilon": 0})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "qls", "epsilon": "x"})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "encode", "muMode": "q"})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "encode", "p": 1.5})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "qls", "positive": true})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "wls", "inputs": {"edges": "g.txt"}})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "qls", "inputs": {"vector": "b.mtx"}})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "network", "inputs": {"other": "x"}})"); }) == ErrorKind::Config);
    CHECK(kindOf([] { cfgOf(R"({"task": "network", "source": 1, "sink": 1})"); }) == ErrorKind::Config);
}

TEST_CASE("config digest ignores the output path and tracks everything else") {
    auto a = cfgOf(R"({"task": "qls", "kappa": 4, "output": "a.json"})");
    auto b = cfgOf(R"({"output": "b.json", "kappa": 4, "task": "qls"})");
    CHECK(a.digest() == b.digest());
    CHECK(a.digest().size() == 64);
    auto c = cfgOf(R"({"task": "qls", "kappa": 4, "seed": 1})");
    CHECK(a.digest() != c.digest());
    CHECK(configFromJson(a.json()).digest() == a.digest());
}

TEST_CASE("relative input paths resolve against the config directory") {
    auto c = configFromJson(nlohmann::json::parse(R"({"task": "network", "inputs": {"edges": "g/e.txt"}})"), "/data/run");
    CHECK(c.inputs.at("edges") == "/data/run/g/e.txt");
}

TEST_CASE("qls identity fixture has fidelity one") {
    auto r = runExperiment(cfgOf(R"({"task": "qls", "fixture": "identity", "seed": 3})"));
    CHECK(r.fidelity >= 1.0 - 1e-9);
    CHECK(r.reference == doctest::Approx(1.0));
    CHECK(r.ledger.totalQueries() > 0.0);
    CHECK(r.task == "qls");
}

TEST_CASE("network P3 fixture estimates two") {
    for (const char* route : {"dense", "sparse"}) {
        nlohmann::json j{{"task", "network"}, {"fixture", "P3"}, {"route", route}, {"epsilon", 0.1}};
        auto r = runExperiment(configFromJson(j));
        CHECK(r.reference == doctest::Approx(2.0));
        CHECK(std::abs(r.estimate - 2.0) <= 0.1 * 2.0);
    }
}

TEST_CASE("every task runs on its default fixture") {
    for (const char* t : {"encode", "hamsim", "sve", "qls", "power", "wls", "gls", "network"}) {
        nlohmann::json j{{"task", t}, {"seed", 5}};
        auto r = runExperiment(configFromJson(j));
        CHECK(r.fidelity >= 0.99);
        CHECK(r.relativeError <= 0.1);
        auto js = nlohmann::json::parse(r.json());
        for (const char* k : {"digest", "estimate", "reference", "fidelity", "ledger", "seed"}) CHECK(js.contains(k));
        CHECK_FALSE(js.contains("wallSeconds"));
    }
}

TEST_CASE("encode references follow the stored normalization") {
    auto f = runExperiment(cfgOf(R"({"task": "encode"})"));
    CHECK(f.estimate == doctest::Approx(std::sqrt(0.25 + 0.0625 + 0.25 + 0.01)));
    auto p = runExperiment(cfgOf(R"({"task": "encode", "muMode": "p", "p": 0.5})"));
    CHECK(p.estimate == doctest::Approx(p.reference));
    CHECK(p.fidelity >= 1.0 - 1e-9);
}

TEST_CASE("reports are byte-identical for equal seeds") {
    for (const char* t : {"sve", "qls", "power", "network"}) {
        nlohmann::json j{{"task", t}, {"seed", 11}};
        CHECK(runExperiment(configFromJson(j)).json() == runExperiment(configFromJson(j)).json());
    }
}

TEST_CASE("input files") {
    const auto dir = std::filesystem::temp_directory_path() / "blockenc-harness-test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "g.txt") << "# triangle\n0 1 1\n1 2 1\n0 2 1\n";
        ComplexMatrix h = ComplexMatrix::Identity(2, 2);
        h(1, 1) = 0.5;
        writeMatrixMarket((dir / "h.mtx").string(), h);
        ComplexMatrix b(2, 1);
        b << 1.0, 1.0;
        writeMatrixMarket((dir / "b.mtx").string(), b);
        std::ofstream(dir / "net.json") << R"({"task": "network", "inputs": {"edges": "g.txt"}, "source": 0, "sink": 2})";
        std::ofstream(dir / "qls.json") << R"({"task": "qls", "inputs": {"matrix": "h.mtx", "vector": "b.mtx"}})";
    }
    auto net = runExperiment(loadExperimentConfig((dir / "net.json").string()));
    CHECK(net.reference == doctest::Approx(2.0 / 3.0));
    CHECK(std::abs(net.estimate / net.reference - 1.0) <= 0.1);
    CHECK(net.instance == "g.txt");
    auto q = runExperiment(loadExperimentConfig((dir / "qls.json").string()));
    CHECK(q.fidelity >= 1.0 - 1e-3);
    CHECK(q.reference == doctest::Approx(std::sqrt(2.5)));
    CHECK(kindOf([&] { loadExperimentConfig((dir / "missing.json").string()); }) == ErrorKind::Io);
    std::ofstream(dir / "bad.json") << "{";
    CHECK(kindOf([&] { loadExperimentConfig((dir / "bad.json").string()); }) == ErrorKind::Config);
    std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes separate contract violations from numerical failures") {
    CHECK(exitCodeFor(Error(ErrorKind::Capacity, "x")) == 2);
    CHECK(exitCodeFor(Error(ErrorKind::SpectrumViolation, "x")) == 2);
    CHECK(exitCodeFor(Error(ErrorKind::Numerical, "x")) == 3);
    CHECK(exitCodeFor(Error(ErrorKind::Config, "x")) == 1);
    CHECK(exitCodeFor(Error(ErrorKind::Io, "x")) == 1);
    CHECK(kindOf([] { runExperiment(cfgOf(R"({"task": "qls", "fixture": "diag", "kappa": 1.5})")); }) ==
          ErrorKind::OutOfRange);
    CHECK(kindOf([] { runExperiment(cfgOf(R"({"task": "qls", "fixture": "nope"})")); }) == ErrorKind::Config);
    CHECK(kindOf([] { runExperiment(cfgOf(R"({"task": "gls", "route": "nope"})")); }) == ErrorKind::Config);
}

TEST_CASE("log-log fit") {
    std::vector<double> x{2, 4, 8, 16}, y;
    for (double v : x) y.push_back(3.0 * v * v);
    auto f = fitLogLog(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(f.residual < 1e-12);
    CHECK(f.points == 4);
    y[1] *= std::exp(0.1);
    y[2] *= std::exp(-0.1);
    auto g = fitLogLog(x, y);
    CHECK(g.residual > 0.0);
    CHECK(kindOf([] { fitLogLog({1.0}, {1.0}); }) == ErrorKind::InvalidArgument);
    CHECK(kindOf([] { fitLogLog({1.0, 2.0}, {1.0, -1.0}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("sweeps") {
    SweepConfig c;
    c.kappas = {4, 8, 16};
    c.seed = 40;
    auto r = scalingSweep(c);
    REQUIRE(r.rows.size() == 3);
    std::istringstream csv(r.csv());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "instance,kappa,epsilon,queries,gates,fidelity,estimate,reference,seed");
    int lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    CHECK(lines == 3);
    for (const auto& row : r.rows) {
        CHECK(row.fidelity >= 1.0 - row.epsilon);
        CHECK(row.reference == doctest::Approx(row.kappa));
        CHECK(row.queries > 0.0);
    }
    CHECK(r.rows[2].seed == 42);
    CHECK(r.fit.slope > 0.8);
    CHECK(r.fit.slope < 1.3);
    c.threads = 1;
    CHECK(scalingSweep(c).csv() == r.csv());
    auto s = nlohmann::json::parse(r.summaryJson());
    CHECK(s["family"] == "vtaa-kappa");
    CHECK(s.contains("residual"));

    auto e = sweepFromJson(nlohmann::json::parse(R"({"family": "epsilon", "kappas": [8], "epsilons": [1e-3, 1e-6]})"));
    auto er = scalingSweep(e);
    CHECK(er.ratio > 1.0);
    CHECK(er.ratio <= 5.0);
    CHECK(kindOf([] { sweepFromJson(nlohmann::json::parse(R"({"family": "epsilon", "epsilons": [1e-3]})")); }) ==
          ErrorKind::Config);
    CHECK(kindOf([] { sweepFromJson(nlohmann::json::parse(R"({"family": "x"})")); }) == ErrorKind::Config);
    CHECK(kindOf([] { sweepFromJson(nlohmann::json::parse(R"({"family": "vtaa-kappa", "kappas": [1, 4]})")); }) ==
          ErrorKind::Config);
}

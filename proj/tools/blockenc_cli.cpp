#include "blockenc/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace blockenc;

namespace {

struct TaskFlags {
    std::string config, out, fixture, route, muMode;
    std::string matrix, vector, edges, problem;
    std::optional<double> kappa, epsilon, delta, p, c, lambda, t, Delta;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> source, sink;
    bool positive = false;
};

struct SweepFlags {
    std::string config, out, summary, family;
    std::vector<double> kappas, epsilons;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
};

void addTaskFlags(CLI::App* sub, TaskFlags& f) {
    sub->add_option("--config", f.config, "experiment JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "random seed");
    sub->add_option("--out", f.out, "report path (default stdout)");
    sub->add_option("--epsilon", f.epsilon, "target precision");
    sub->add_option("--kappa", f.kappa, "condition number bound");
    sub->add_option("--mu-mode", f.muMode, "normalization for encode")->check(CLI::IsMember({"frobenius", "p"}));
    sub->add_option("--p", f.p, "exponent for the p-norm mode");
    sub->add_option("--c", f.c, "power exponent");
    sub->add_option("--delta", f.delta, "failure probability");
    sub->add_option("--lambda", f.lambda, "spectral gap lower bound");
    sub->add_option("--t", f.t, "evolution time");
    sub->add_option("--Delta", f.Delta, "singular value resolution");
    sub->add_option("--fixture", f.fixture, "built-in instance");
    sub->add_option("--route", f.route, "encoding route");
    sub->add_option("--matrix", f.matrix, "Matrix Market matrix");
    sub->add_option("--vector", f.vector, "Matrix Market vector");
    sub->add_option("--edges", f.edges, "edge list");
    sub->add_option("--problem", f.problem, "regression JSON");
    sub->add_option("--source", f.source, "source vertex");
    sub->add_option("--sink", f.sink, "sink vertex");
    sub->add_flag("--positive", f.positive, "positive power");
}

ExperimentConfig resolve(Task task, const TaskFlags& f) {
    ExperimentConfig cfg;
    if (!f.config.empty()) {
        cfg = loadExperimentConfig(f.config);
        if (cfg.task != task) fail(ErrorKind::Config, std::string("config is for task ") + taskName(cfg.task));
    }
    cfg.task = task;
    auto over = [](auto& dst, const auto& src) {
        if (src) dst = src;
    };
    over(cfg.kappa, f.kappa);
    over(cfg.epsilon, f.epsilon);
    over(cfg.delta, f.delta);
    over(cfg.p, f.p);
    over(cfg.c, f.c);
    over(cfg.lambda, f.lambda);
    over(cfg.time, f.t);
    over(cfg.Delta, f.Delta);
    over(cfg.source, f.source);
    over(cfg.sink, f.sink);
    if (f.seed) cfg.seed = *f.seed;
    if (!f.out.empty()) cfg.output = f.out;
    if (!f.fixture.empty()) cfg.fixture = f.fixture;
    if (!f.route.empty()) cfg.route = f.route;
    if (!f.muMode.empty()) cfg.muMode = f.muMode == "p" ? MuMode::PNorm : MuMode::Frobenius;
    if (f.positive) cfg.positive = true;
    if (!f.matrix.empty()) cfg.inputs["matrix"] = f.matrix;
    if (!f.vector.empty()) cfg.inputs["vector"] = f.vector;
    if (!f.edges.empty()) cfg.inputs["edges"] = f.edges;
    if (!f.problem.empty()) cfg.inputs["problem"] = f.problem;
    cfg.validate();
    return cfg;
}

void writeText(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::Io, "cannot write " + path);
    out << text;
}

int runTask(Task task, const TaskFlags& f) {
    const ExperimentConfig cfg = resolve(task, f);
    const RunReport r = runExperiment(cfg);
    writeText(cfg.output, r.json());
    std::cerr << taskName(task) << ": wall " << r.wallSeconds << " s\n";
    return 0;
}

int runSweep(const SweepFlags& f) {
    SweepConfig cfg;
    if (!f.config.empty()) {
        std::ifstream in(f.config);
        if (!in) fail(ErrorKind::Io, "cannot open " + f.config);
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::Config, e.what());
        }
        cfg = sweepFromJson(j);
    }
    if (!f.family.empty()) cfg.family = parseSweepFamily(f.family);
    if (!f.kappas.empty()) cfg.kappas = f.kappas;
    if (!f.epsilons.empty()) cfg.epsilons = f.epsilons;
    if (f.seed) cfg.seed = *f.seed;
    if (f.threads) cfg.threads = f.threads;
    const SweepResult r = scalingSweep(cfg);
    writeText(f.out, r.csv());
    if (!f.summary.empty()) {
        writeText(f.summary, r.summaryJson());
    } else if (!f.out.empty()) {
        writeText(f.out + ".summary.json", r.summaryJson());
    } else {
        std::cerr << r.summaryJson();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-encoding simulator harness"};
    app.require_subcommand(1);

    TaskFlags tf;
    std::vector<std::pair<CLI::App*, Task>> tasks;
    for (Task t : {Task::Encode, Task::HamSim, Task::SVE, Task::QLS, Task::Power, Task::WLS, Task::GLS,
                   Task::Network}) {
        CLI::App* sub = app.add_subcommand(taskName(t), std::string("run the ") + taskName(t) + " experiment");
        addTaskFlags(sub, tf);
        tasks.emplace_back(sub, t);
    }

    SweepFlags sf;
    CLI::App* sweep = app.add_subcommand("sweep", "scaling sweep over kappa or epsilon");
    sweep->add_option("--config", sf.config, "sweep JSON")->check(CLI::ExistingFile);
    sweep->add_option("--family", sf.family, "vtaa-kappa, naive-kappa or epsilon");
    sweep->add_option("--kappa", sf.kappas, "kappa grid")->delimiter(',');
    sweep->add_option("--epsilon", sf.epsilons, "epsilon grid")->delimiter(',');
    sweep->add_option("--seed", sf.seed, "random seed");
    sweep->add_option("--out", sf.out, "CSV path (default stdout)");
    sweep->add_option("--summary", sf.summary, "slope summary path");
    sweep->add_option("--threads", sf.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (sweep->parsed()) return runSweep(sf);
        for (const auto& [sub, t] : tasks)
            if (sub->parsed()) return runTask(t, tf);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exitCodeFor(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "karasu/dataset.hpp"
#include "karasu/harness.hpp"
#include "karasu/optimizer.hpp"
#include "karasu/repository.hpp"
#include "karasu/rng.hpp"

namespace fs = std::filesystem;
using namespace karasu;

namespace {

// exit codes: 0 success, 1 input error, 2 runtime failure
constexpr int kInputError = 1;
constexpr int kRuntimeFailure = 2;

int cmdIngest(const std::string& tracePath, const std::string& specsPath, const std::string& repoDir) {
    MachineSpecTable specs;
    IngestResult result;
    try {
        specs = loadMachineSpecs(specsPath);
        result = ingest(tracePath, specs);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    }
    if (!repoDir.empty()) {
        Repository repo;
        for (const auto& rec : result.records) repo.add(rec);
        repo.store(repoDir);
    }
    std::cout << "ingested " << result.records.size() << " runs";
    if (result.droppedSamples > 0) std::cout << " (dropped " << result.droppedSamples << " samples)";
    if (!repoDir.empty()) std::cout << " -> " << repoDir;
    std::cout << "\n";
    return 0;
}

int cmdSynth(const std::string& specPath, const std::string& workloadId, const std::string& repoDir,
             const std::string& outPath) {
    SyntheticWorkloadSpec spec;
    try {
        spec = parseSyntheticSpec(specPath);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    }
    const SearchSpace space = defaultSyntheticSpace();
    const SyntheticWorkload synth(spec, space);
    std::ostringstream table;
    table << "machineType,nodeCount,runtimeS,costUsd,energyWh\n";
    Repository repo;
    int sequence = 0;
    for (const auto& c : space.configurations()) {
        RunRecord r = synth.run(c);
        r.workloadId = workloadId;
        r.sequence = ++sequence;
        table << c.machineType << ',' << c.nodeCount << ',' << r.measures.runtimeS << ','
              << r.measures.costUsd << ',' << r.measures.energyWh << "\n";
        repo.add(r);
    }
    if (!repoDir.empty()) repo.store(repoDir);
    if (!outPath.empty()) {
        std::ofstream out(outPath);
        if (!out) {
            std::cerr << "cannot write " << outPath << "\n";
            return kRuntimeFailure;
        }
        out << table.str();
    } else {
        std::cout << table.str();
    }
    return 0;
}

int cmdProfile(const std::string& specPath, const std::string& objectiveList, double runtimeTarget,
               int models, bool noKarasu, const std::string& repoDir, std::uint64_t seed,
               const std::string& workloadId) {
    SyntheticWorkloadSpec spec;
    Repository store;
    try {
        spec = parseSyntheticSpec(specPath);
        store = Repository::load(repoDir);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    }
    const SearchSpace space = defaultSyntheticSpace();
    const SyntheticWorkload synth(spec, space);

    ProfilingSession session(workloadId, space);
    std::stringstream objs(objectiveList);
    std::string obj;
    while (std::getline(objs, obj, ',')) {
        if (obj == "cost")
            session.objectives.push_back(MeasureKind::cost);
        else if (obj == "energy")
            session.objectives.push_back(MeasureKind::energy);
        else {
            std::cerr << "input error: unknown objective '" << obj << "'\n";
            return kInputError;
        }
    }
    if (session.objectives.empty() || session.objectives.size() > 2) {
        std::cerr << "input error: need 1 or 2 objectives\n";
        return kInputError;
    }
    session.constraints = {{MeasureKind::runtime, runtimeTarget}};
    session.supportCount = models;
    session.rngSeed = seed;

    const fs::path repoPath(repoDir);
    const SessionResult result = runSession(
        [&](const ResourceConfiguration& c) { return synth.run(c); }, std::move(session), store,
        !noKarasu, repoDir.empty() ? nullptr : &repoPath);

    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const auto& r = result.history[i];
        std::cout << "run " << (i + 1) << ": " << r.config.machineType << " x" << r.config.nodeCount
                  << " runtime=" << r.measures.runtimeS << "s cost=$" << r.measures.costUsd
                  << " energy=" << r.measures.energyWh << "Wh"
                  << (r.measures.runtimeS <= runtimeTarget ? "" : " [timeout]") << "\n";
    }
    std::cout << "stopped after " << result.stoppedAt << " runs (" << stopReasonName(result.stopReason)
              << ")\n";
    for (const auto& [kind, best] : result.bestFeasible) {
        std::cout << "best feasible " << measureKindName(kind) << ": ";
        if (best)
            std::cout << *best << "\n";
        else
            std::cout << "none\n";
    }
    return 0;
}

int cmdExperiment(const std::string& planPath, const std::string& outDir) {
    ExperimentPlan plan;
    try {
        plan = loadPlan(planPath);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    }
    const ExperimentOutput output = runExperiment(plan);
    fs::create_directories(outDir);
    writeResultsCsv(fs::path(outDir) / "results.csv", output.rows);
    writeOptimaCsv(fs::path(outDir) / "optima.csv", output.optima);
    const std::string summary = summarizeResults(output.rows, output.optima);
    std::ofstream sum(fs::path(outDir) / "summary.json");
    sum << summary << "\n";
    std::cout << "wrote " << output.rows.size() << " result rows to " << outDir << "\n";
    return 0;
}

int cmdReport(const std::string& resultsPath, bool summary) {
    std::vector<ResultRow> rows;
    std::vector<OptimumRow> optima;
    try {
        rows = readResultsCsv(resultsPath);
        const fs::path optimaPath = fs::path(resultsPath).parent_path() / "optima.csv";
        if (fs::exists(optimaPath)) optima = readOptimaCsv(optimaPath);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInputError;
    }
    if (summary) {
        std::cout << summarizeResults(rows, optima) << "\n";
    } else {
        std::cout << rows.size() << " rows\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Collaborative resource-configuration profiling"};
    app.require_subcommand(1);

    std::string tracePath, specsPath, repoDir, outPath, planPath, resultsPath, workloadId = "target";
    std::string objectiveList = "cost";
    double runtimeTarget = 0.0;
    int models = 3;
    bool noKarasu = false, wantSummary = false;
    std::uint64_t seed = 0;

    auto* ingestCmd = app.add_subcommand("ingest", "Ingest a workload execution trace");
    ingestCmd->add_option("trace", tracePath, "trace CSV")->required();
    ingestCmd->add_option("specs", specsPath, "machine specs CSV")->required();
    ingestCmd->add_option("--repo", repoDir, "repository directory to append run tuples to");

    auto* synthCmd = app.add_subcommand("synth", "Evaluate a synthetic workload over the search space");
    synthCmd->add_option("spec-file", specsPath, "synthetic workload spec JSON")->required();
    synthCmd->add_option("--id", workloadId, "workload id for stored tuples");
    synthCmd->add_option("--repo", repoDir, "repository directory to store run tuples in");
    synthCmd->add_option("--out", outPath, "write the measure table to a file");

    auto* profileCmd = app.add_subcommand("profile", "Run one profiling session");
    profileCmd->add_option("--spec", specsPath, "synthetic workload spec JSON")->required();
    profileCmd->add_option("--objective", objectiveList, "cost or cost,energy");
    profileCmd->add_option("--runtime-target", runtimeTarget, "runtime bound in seconds")->required();
    profileCmd->add_option("--models", models, "number of support models");
    profileCmd->add_flag("--no-karasu", noKarasu, "baseline mode (no shared models)");
    profileCmd->add_option("--repo", repoDir, "shared repository directory");
    profileCmd->add_option("--seed", seed, "random seed");
    profileCmd->add_option("--workload-id", workloadId, "opaque workload id");

    auto* expCmd = app.add_subcommand("experiment", "Run an experiment plan");
    expCmd->add_option("--plan", planPath, "plan JSON")->required();
    expCmd->add_option("--out", outPath, "output directory")->required();

    auto* reportCmd = app.add_subcommand("report", "Summarize an experiment results file");
    reportCmd->add_option("results", resultsPath, "results.csv")->required();
    reportCmd->add_flag("--summary", wantSummary, "print aggregate statistics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kInputError;
    }

    try {
        if (ingestCmd->parsed()) return cmdIngest(tracePath, specsPath, repoDir);
        if (synthCmd->parsed()) return cmdSynth(specsPath, workloadId, repoDir, outPath);
        if (profileCmd->parsed())
            return cmdProfile(specsPath, objectiveList, runtimeTarget, models, noKarasu, repoDir,
                              seed, workloadId);
        if (expCmd->parsed()) return cmdExperiment(planPath, outPath);
        if (reportCmd->parsed()) return cmdReport(resultsPath, wantSummary);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
    return 0;
}

#ifndef KARASU_HARNESS_HPP
#define KARASU_HARNESS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "karasu/dataset.hpp"
#include "karasu/optimizer.hpp"
#include "karasu/repository.hpp"

namespace karasu {

enum class Scenario { boost, cases, heterogeneous, moo };
enum class CaseFilter { A, B, C, D, none };

Scenario scenarioFromName(const std::string& name);
CaseFilter caseFilterFromName(const std::string& name);

/// Harness-side workload identity; never enters the shared repository.
struct WorkloadMeta {
    std::string framework;
    std::string algorithm;
    std::string datasetTag;
};

struct PlannedWorkload {
    std::string name;
    WorkloadMeta meta;
    SyntheticWorkloadSpec spec;
};

struct ExperimentPlan {
    Scenario scenario = Scenario::boost;
    std::vector<double> runtimePercentiles = {0.10, 0.30, 0.50, 0.70, 0.90};
    int repetitions = 10;
    std::vector<int> modelCounts = {3};
    CaseFilter caseFilter = CaseFilter::none;
    std::vector<std::uint64_t> seeds;  // one per repetition; derived if empty
    std::vector<PlannedWorkload> workloads;
    SessionBudget budget;
};

ExperimentPlan loadPlan(const std::filesystem::path& path);

/// Runtime target as a percentile (linear interpolation) of the completed
/// runtimes; the feasible set under the target is non-empty by construction.
double computeRuntimeTarget(const std::vector<double>& completedRuntimes, double percentile);

/// Candidate workload names whose metadata relation to the target matches the
/// data-availability case.
std::vector<std::string> applyCaseFilter(const std::map<std::string, WorkloadMeta>& candidates,
                                         const std::string& targetName, const WorkloadMeta& targetMeta,
                                         CaseFilter filter);

/// Keeps only the first k runs (by sequence) of each candidate workload,
/// k ~ Uniform{3..n}, seeded.
Repository truncateHeterogeneous(const Repository& store, std::uint64_t seed);

struct ResultRow {
    std::string scenario;
    std::string workloadId;
    double percentile = 0.0;
    int repetition = 0;
    int iteration = 0;
    std::string method;
    std::optional<double> bestFeasibleCost;
    std::optional<double> bestFeasibleEnergy;
    double cumulativeSearchCost = 0.0;
    double cumulativeSearchTimeS = 0.0;
    int timeoutCount = 0;
    std::optional<double> hypervolume;
    int stoppedAt = 0;
    std::string stopReason;
};

/// Exhaustively computed per-target optima, emitted so summaries stay
/// recomputable from output files alone.
struct OptimumRow {
    std::string workloadId;
    double percentile = 0.0;
    double runtimeTargetS = 0.0;
    double optimalCost = 0.0;
    double optimalEnergy = 0.0;
};

struct ExperimentOutput {
    std::vector<ResultRow> rows;
    std::vector<OptimumRow> optima;
};

ExperimentOutput runExperiment(const ExperimentPlan& plan);

void writeResultsCsv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);
void writeOptimaCsv(const std::filesystem::path& path, const std::vector<OptimumRow>& optima);
std::vector<ResultRow> readResultsCsv(const std::filesystem::path& path);
std::vector<OptimumRow> readOptimaCsv(const std::filesystem::path& path);

/// Aggregate statistics (JSON text): per method and iteration the fraction of
/// sessions within 25% of the optimal cost and at the optimum, plus mean
/// cumulative search cost/time and timeout counts.
std::string summarizeResults(const std::vector<ResultRow>& rows,
                             const std::vector<OptimumRow>& optima);

}  // namespace karasu

#endif

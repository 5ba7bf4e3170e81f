#ifndef KARASU_DATASET_HPP
#define KARASU_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "karasu/search_space.hpp"
#include "karasu/types.hpp"

namespace karasu {

/// One row of an execution trace. Workload metadata stays harness-side and
/// never enters the shared repository.
struct TraceRow {
    std::string workloadId;
    std::string framework;
    std::string algorithm;
    std::string datasetTag;
    std::string machineType;
    int nodeCount = 0;
    double runtimeS = 0.0;
    bool completed = false;
    std::vector<std::vector<double>> rawMetrics;  // 6 rows, canonical order
};

using MachineSpecTable = std::map<std::string, MachineSpec>;

/// Machine specs CSV: machine_type,vcpus,mem_gb,price_per_hour_usd,power_idle_w,power_full_w
MachineSpecTable loadMachineSpecs(const std::filesystem::path& path);

/// Linear CPU power profile: watt-hours over the whole cluster for one run.
double deriveEnergy(const TraceRow& row, const MachineSpec& spec);

struct IngestResult {
    std::vector<TraceRow> rows;
    std::vector<RunRecord> records;  // same order as rows
    int droppedSamples = 0;          // non-finite metric samples skipped
};

/// Trace CSV columns: workload_id,framework,algorithm,dataset,machine_type,
/// node_count,runtime_s,completed, then one column per canonical metric with
/// '|'-separated samples. Cost uses per-second billing.
IngestResult ingest(const std::filesystem::path& tracePath, const MachineSpecTable& specs);

/// Parameters of a synthetic black-box workload: a smooth runtime surface
/// over (nodeCount, vcpus, memGb) with multiplicative log-normal noise, and a
/// metric-profile archetype that controls generated metric vectors.
struct SyntheticWorkloadSpec {
    std::uint64_t seed = 0;
    double workScale = 2000.0;  // serial work, cpu-seconds
    double noiseLevel = 0.05;   // sigma of the log-normal runtime noise
    int archetype = 0;          // 0..3
};

/// Deterministic-given-seed mapping from configuration to RunRecord. Pure
/// function of (spec, config); safe to call concurrently.
class SyntheticWorkload {
   public:
    SyntheticWorkload(const SyntheticWorkloadSpec& spec, const SearchSpace& space);

    /// Workload id and sequence are left for the caller to fill.
    RunRecord run(const ResourceConfiguration& config) const;

    /// Noise-free runtime surface (used by exhaustive oracles).
    double meanRuntimeSeconds(const ResourceConfiguration& config) const;

    const SearchSpace& space() const { return space_; }
    const SyntheticWorkloadSpec& spec() const { return spec_; }

   private:
    MetricVector makeMetrics(const ResourceConfiguration& config) const;

    SyntheticWorkloadSpec spec_;
    SearchSpace space_;
    // landscape parameters derived from the seed
    double work_ = 0.0;
    double overheadPerNode_ = 0.0;
    double vcpuExponent_ = 1.0;
    double memDemandGb_ = 0.0;
    double memPenaltyWeight_ = 0.0;
};

/// Default desk-scale search space: 3 machine families x 3 sizes x 8 node
/// counts. xlarge and 2xlarge carry exactly 2x and 4x the large size's power
/// bounds and prices.
SearchSpace defaultSyntheticSpace();

SyntheticWorkloadSpec parseSyntheticSpec(const std::filesystem::path& path);

}  // namespace karasu

#endif

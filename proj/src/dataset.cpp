#include "karasu/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "karasu/repository.hpp"
#include "karasu/rng.hpp"

namespace karasu {

namespace {

std::vector<std::string> splitCsvLine(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

std::vector<double> parseSamples(const std::string& field, int lineNo, const char* metric,
                                 int& dropped) {
    std::vector<double> out;
    std::stringstream ss(field);
    std::string tok;
    while (std::getline(ss, tok, '|')) {
        if (tok.empty()) continue;
        double v;
        std::size_t consumed = 0;
        try {
            v = std::stod(tok, &consumed);
        } catch (const std::exception&) {
            consumed = 0;
        }
        if (consumed != tok.size())
            throw std::runtime_error("line " + std::to_string(lineNo) + ": bad sample '" + tok +
                                     "' in metric " + metric);
        if (!std::isfinite(v)) {
            ++dropped;  // missing/NaN samples are dropped, counted in diagnostics
            continue;
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace

MachineSpecTable loadMachineSpecs(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open machine specs file " + path.string());
    MachineSpecTable table;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#') continue;
        if (lineNo == 1 && line.rfind("machine_type", 0) == 0) continue;  // header
        const auto f = splitCsvLine(line);
        if (f.size() != 6)
            throw std::runtime_error(path.string() + " line " + std::to_string(lineNo) +
                                     ": expected 6 columns, got " + std::to_string(f.size()));
        MachineSpec spec;
        try {
            spec.vcpus = std::stoi(f[1]);
            spec.memGb = std::stod(f[2]);
            spec.pricePerHourUsd = std::stod(f[3]);
            spec.powerIdleW = std::stod(f[4]);
            spec.powerFullW = std::stod(f[5]);
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + " line " + std::to_string(lineNo) +
                                     ": malformed numeric field");
        }
        table[f[0]] = spec;
    }
    return table;
}

double deriveEnergy(const TraceRow& row, const MachineSpec& spec) {
    const auto& idle = row.rawMetrics.at(0);  // cpu.%idle
    if (idle.empty()) throw std::invalid_argument("deriveEnergy: no cpu.%idle samples");
    double meanIdle = 0.0;
    for (double v : idle) meanIdle += v;
    meanIdle /= static_cast<double>(idle.size());
    const double u = std::clamp(1.0 - meanIdle / 100.0, 0.0, 1.0);
    const double powerW = spec.powerIdleW + (spec.powerFullW - spec.powerIdleW) * u;
    return powerW * (row.runtimeS / 3600.0) * row.nodeCount;
}

IngestResult ingest(const std::filesystem::path& tracePath, const MachineSpecTable& specs) {
    std::ifstream in(tracePath);
    if (!in) throw std::runtime_error("cannot open trace file " + tracePath.string());
    IngestResult result;
    std::map<std::string, int> sequenceByWorkload;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line[0] == '#') continue;
        if (lineNo == 1 && line.rfind("workload_id", 0) == 0) continue;
        const auto f = splitCsvLine(line);
        if (f.size() != 8 + kMetricCount)
            throw std::runtime_error(tracePath.string() + " line " + std::to_string(lineNo) +
                                     ": expected " + std::to_string(8 + kMetricCount) +
                                     " columns, got " + std::to_string(f.size()));
        TraceRow row;
        row.workloadId = f[0];
        row.framework = f[1];
        row.algorithm = f[2];
        row.datasetTag = f[3];
        row.machineType = f[4];
        try {
            row.nodeCount = std::stoi(f[5]);
            row.runtimeS = std::stod(f[6]);
            row.completed = std::stoi(f[7]) != 0;
        } catch (const std::exception&) {
            throw std::runtime_error(tracePath.string() + " line " + std::to_string(lineNo) +
                                     ": malformed numeric field");
        }
        if (row.completed && row.runtimeS <= 0.0)
            throw std::runtime_error(tracePath.string() + " line " + std::to_string(lineNo) +
                                     ": completed run with non-positive runtime");
        row.rawMetrics.resize(kMetricCount);
        for (int m = 0; m < kMetricCount; ++m)
            row.rawMetrics[m] = parseSamples(f[8 + m], lineNo, kMetricNames[m], result.droppedSamples);

        auto specIt = specs.find(row.machineType);
        if (specIt == specs.end())
            throw std::runtime_error(tracePath.string() + " line " + std::to_string(lineNo) +
                                     ": unknown machine type '" + row.machineType + "'");

        RunRecord rec;
        rec.workloadId = row.workloadId;
        rec.config.machineType = row.machineType;
        rec.config.nodeCount = row.nodeCount;
        rec.config.perNode = specIt->second;
        rec.metrics = aggregate(row.rawMetrics);
        rec.measures.runtimeS = row.runtimeS;
        rec.measures.costUsd =
            specIt->second.pricePerHourUsd * row.nodeCount * row.runtimeS / 3600.0;
        rec.measures.energyWh = deriveEnergy(row, specIt->second);
        rec.sequence = ++sequenceByWorkload[row.workloadId];
        result.rows.push_back(std::move(row));
        result.records.push_back(std::move(rec));
    }
    return result;
}

namespace {

// 18-value metric shapes per archetype: centers and spreads per metric, in
// percent. Archetype 1 mirrors archetype 0 so their flattened vectors are
// strongly anti-correlated (used by the dissimilarity experiments).
struct ArchetypeProfile {
    std::array<double, kMetricCount> center;
    std::array<double, kMetricCount> spread;
};

const ArchetypeProfile kArchetypes[] = {
    // cpu-bound: low idle, busy paging
    {{12.0, 45.0, 30.0, 20.0, 3.0, 88.0}, {6.0, 8.0, 10.0, 6.0, 1.5, 4.0}},
    // mirror of the cpu-bound profile
    {{88.0, 55.0, 70.0, 80.0, 97.0, 12.0}, {6.0, 8.0, 10.0, 6.0, 1.5, 4.0}},
    // io-bound: idle cpu, saturated disk/network
    {{70.0, 25.0, 92.0, 75.0, 10.0, 40.0}, {8.0, 5.0, 3.0, 9.0, 4.0, 12.0}},
    // memory-bound: high memory and swap pressure
    {{40.0, 93.0, 15.0, 10.0, 55.0, 25.0}, {10.0, 2.5, 5.0, 3.0, 12.0, 8.0}},
};

double clampPct(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

SyntheticWorkload::SyntheticWorkload(const SyntheticWorkloadSpec& spec, const SearchSpace& space)
    : spec_(spec), space_(space) {
    if (spec.archetype < 0 || spec.archetype >= static_cast<int>(std::size(kArchetypes)))
        throw std::invalid_argument("archetype out of range");
    Rng rng(Rng::deriveSeed(spec_.seed, 0x1a));
    work_ = spec_.workScale * (0.5 + rng.uniform01());
    overheadPerNode_ = (1.0 + 4.0 * rng.uniform01()) * spec_.workScale / 2000.0;
    vcpuExponent_ = 0.6 + 0.3 * rng.uniform01();
    memDemandGb_ = 4.0 + 24.0 * rng.uniform01();
    memPenaltyWeight_ = 0.5 + rng.uniform01();
}

double SyntheticWorkload::meanRuntimeSeconds(const ResourceConfiguration& c) const {
    const double parallel = work_ / (c.nodeCount * std::pow(static_cast<double>(c.perNode.vcpus),
                                                            vcpuExponent_));
    const double scaleOut = overheadPerNode_ * c.nodeCount;
    const double memShortfall = std::max(0.0, memDemandGb_ - c.perNode.memGb) / memDemandGb_;
    const double memPenalty = 1.0 + memPenaltyWeight_ * memShortfall;
    return (parallel + scaleOut) * memPenalty;
}

MetricVector SyntheticWorkload::makeMetrics(const ResourceConfiguration& c) const {
    const ArchetypeProfile& prof = kArchetypes[spec_.archetype];
    // small per-workload jitter keeps same-archetype vectors highly correlated
    Rng jitterRng(Rng::deriveSeed(spec_.seed, 0x2b));
    const std::size_t configIdx = space_.indexOf(c);
    Rng configRng(Rng::deriveSeed(spec_.seed, 0x3c, configIdx));
    MetricVector out;
    for (int m = 0; m < kMetricCount; ++m) {
        const double jitter = (jitterRng.uniform01() - 0.5) * 4.0;
        const double wiggle = (configRng.uniform01() - 0.5) * 2.0;
        const double center = clampPct(prof.center[m] + jitter + wiggle);
        const double spread = prof.spread[m];
        out.metrics[m].p10 = clampPct(center - spread);
        out.metrics[m].p50 = center;
        out.metrics[m].p90 = clampPct(center + spread);
        // clamping can only shrink the tails, order stays intact
    }
    return out;
}

RunRecord SyntheticWorkload::run(const ResourceConfiguration& c) const {
    const std::size_t configIdx = space_.indexOf(c);
    Rng noiseRng(Rng::deriveSeed(spec_.seed, 0x4d, configIdx));
    const double noise = std::exp(spec_.noiseLevel * noiseRng.gaussian());
    RunRecord rec;
    rec.config = c;
    rec.metrics = makeMetrics(c);
    rec.measures.runtimeS = meanRuntimeSeconds(c) * noise;
    rec.measures.costUsd = c.perNode.pricePerHourUsd * c.nodeCount * rec.measures.runtimeS / 3600.0;
    const double u = std::clamp(1.0 - rec.metrics.metrics[0].p50 / 100.0, 0.0, 1.0);
    const double powerW = c.perNode.powerIdleW + (c.perNode.powerFullW - c.perNode.powerIdleW) * u;
    rec.measures.energyWh = powerW * (rec.measures.runtimeS / 3600.0) * c.nodeCount;
    return rec;
}

SearchSpace defaultSyntheticSpace() {
    struct Family {
        const char* name;
        double memPerVcpu;
        double basePrice;
    };
    const Family families[] = {{"c5", 2.0, 0.085}, {"m5", 4.0, 0.096}, {"r5", 8.0, 0.126}};
    const struct {
        const char* suffix;
        int vcpus;
        double mult;  // price and power scale with size
    } sizes[] = {{"large", 2, 1.0}, {"xlarge", 4, 2.0}, {"2xlarge", 8, 4.0}};
    const int nodeCounts[] = {4, 6, 8, 12, 16, 20, 24, 32};

    std::vector<ResourceConfiguration> configs;
    for (const auto& fam : families) {
        for (const auto& size : sizes) {
            ResourceConfiguration c;
            c.machineType = std::string(fam.name) + "." + size.suffix;
            c.perNode.vcpus = size.vcpus;
            c.perNode.memGb = fam.memPerVcpu * size.vcpus;
            c.perNode.pricePerHourUsd = fam.basePrice * size.mult;
            c.perNode.powerIdleW = 10.0 * size.mult;
            c.perNode.powerFullW = 45.0 * size.mult;
            for (int n : nodeCounts) {
                c.nodeCount = n;
                configs.push_back(c);
            }
        }
    }
    return SearchSpace(std::move(configs));
}

SyntheticWorkloadSpec parseSyntheticSpec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open synthetic spec " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path.string() + ": malformed JSON (" + e.what() + ")");
    }
    SyntheticWorkloadSpec spec;
    spec.seed = j.value("seed", 0ULL);
    spec.workScale = j.value("workScale", 2000.0);
    spec.noiseLevel = j.value("noiseLevel", 0.05);
    spec.archetype = j.value("archetype", 0);
    return spec;
}

}  // namespace karasu

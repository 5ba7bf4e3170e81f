#ifndef KARASU_TYPES_HPP
#define KARASU_TYPES_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace karasu {

/// Per-node machine specification (price and power bounds included).
struct MachineSpec {
    int vcpus = 0;
    double memGb = 0.0;
    double pricePerHourUsd = 0.0;
    double powerIdleW = 0.0;
    double powerFullW = 0.0;
};

/// A search-space point: machine type plus homogeneous node count.
struct ResourceConfiguration {
    std::string machineType;
    int nodeCount = 1;
    MachineSpec perNode;

    bool samePoint(const ResourceConfiguration& other) const {
        return machineType == other.machineType && nodeCount == other.nodeCount;
    }
};

/// Canonical metric order; every serialized and flattened vector follows it.
inline constexpr std::array<const char*, 6> kMetricNames = {
    "cpu.%idle",       "memory.%memused", "disk.%util",
    "network.%ifutil", "swap.%swpused",   "paging.%vmeff"};

inline constexpr int kMetricCount = 6;

struct MetricQuantiles {
    double p10 = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
};

/// Aggregated per-metric quantiles (10th/50th/90th), all in percent.
struct MetricVector {
    std::array<MetricQuantiles, kMetricCount> metrics{};

    /// The 18 quantile values in canonical order.
    std::array<double, 18> flatten() const {
        std::array<double, 18> out{};
        for (int i = 0; i < kMetricCount; ++i) {
            out[3 * i + 0] = metrics[i].p10;
            out[3 * i + 1] = metrics[i].p50;
            out[3 * i + 2] = metrics[i].p90;
        }
        return out;
    }
};

struct Measures {
    double runtimeS = 0.0;
    double costUsd = 0.0;
    double energyWh = 0.0;
};

enum class MeasureKind { cost, energy, runtime, custom };

inline const char* measureKindName(MeasureKind k) {
    switch (k) {
        case MeasureKind::cost: return "cost";
        case MeasureKind::energy: return "energy";
        case MeasureKind::runtime: return "runtime";
        case MeasureKind::custom: return "custom";
    }
    return "?";
}

inline double measureValue(const Measures& m, MeasureKind k) {
    switch (k) {
        case MeasureKind::cost: return m.costUsd;
        case MeasureKind::energy: return m.energyWh;
        case MeasureKind::runtime: return m.runtimeS;
        case MeasureKind::custom:
            throw std::invalid_argument("custom measures are not carried by RunRecord");
    }
    throw std::invalid_argument("unknown measure kind");
}

/// The shareable profiling tuple. Deliberately carries no workload-descriptive
/// fields beyond the opaque id.
struct RunRecord {
    std::string workloadId;
    ResourceConfiguration config;
    MetricVector metrics;
    Measures measures;
    int sequence = 0;
};

}  // namespace karasu

#endif

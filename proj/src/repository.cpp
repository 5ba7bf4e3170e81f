#include "karasu/repository.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <stdexcept>

namespace karasu {

using nlohmann::json;

double quantileLinear(std::vector<double> samples, double p) {
    if (samples.empty()) throw std::invalid_argument("quantile of empty sample set");
    std::sort(samples.begin(), samples.end());
    const double h = p * (static_cast<double>(samples.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, samples.size() - 1);
    return samples[lo] + (h - static_cast<double>(lo)) * (samples[hi] - samples[lo]);
}

MetricVector aggregate(const std::vector<std::vector<double>>& raw) {
    if (raw.size() != kMetricCount)
        throw std::invalid_argument("aggregate expects exactly 6 metric rows");
    MetricVector out;
    for (int i = 0; i < kMetricCount; ++i) {
        if (raw[i].empty())
            throw std::invalid_argument(std::string("aggregate: empty sample row for ") + kMetricNames[i]);
        out.metrics[i].p10 = quantileLinear(raw[i], 0.10);
        out.metrics[i].p50 = quantileLinear(raw[i], 0.50);
        out.metrics[i].p90 = quantileLinear(raw[i], 0.90);
    }
    return out;
}

PairSimilarity pairSimilarity(const RunRecord& a, const RunRecord& b) {
    if (a.config.machineType != b.config.machineType)
        throw std::invalid_argument("pairSimilarity requires matching machine types");
    PairSimilarity out;
    const double logDist =
        std::abs(std::log2(static_cast<double>(a.config.nodeCount)) -
                 std::log2(static_cast<double>(b.config.nodeCount)));
    out.scale = 1.0 / std::pow(2.0, logDist);

    const auto va = a.metrics.flatten();
    const auto vb = b.metrics.flatten();
    const int n = static_cast<int>(va.size());
    double ma = 0.0, mb = 0.0;
    for (int i = 0; i < n; ++i) {
        ma += va[i];
        mb += vb[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0.0, sa = 0.0, sb = 0.0;
    for (int i = 0; i < n; ++i) {
        cov += (va[i] - ma) * (vb[i] - mb);
        sa += (va[i] - ma) * (va[i] - ma);
        sb += (vb[i] - mb) * (vb[i] - mb);
    }
    if (sa <= 0.0 || sb <= 0.0) {
        out.score = 0.5;  // Pearson undefined, no-information neutral
        return out;
    }
    const double r = std::clamp(cov / std::sqrt(sa * sb), -1.0, 1.0);
    out.score = (r + 1.0) / 2.0;
    return out;
}

void Repository::add(const RunRecord& record) {
    if (record.measures.runtimeS <= 0.0 || record.measures.costUsd <= 0.0 ||
        record.measures.energyWh <= 0.0)
        throw std::invalid_argument("RunRecord measures must be positive");
    byWorkload_[record.workloadId].push_back(record);
}

const std::vector<RunRecord>& Repository::runs(const std::string& workloadId) const {
    auto it = byWorkload_.find(workloadId);
    if (it == byWorkload_.end()) throw std::invalid_argument("unknown workloadId: " + workloadId);
    return it->second;
}

std::vector<std::string> Repository::workloadIds() const {
    std::vector<std::string> out;
    out.reserve(byWorkload_.size());
    for (const auto& [id, _] : byWorkload_) out.push_back(id);
    return out;
}

std::size_t Repository::totalRuns() const {
    std::size_t n = 0;
    for (const auto& [_, rs] : byWorkload_) n += rs.size();
    return n;
}

double Repository::workloadSimilarity(const std::string& target, const std::string& candidate) const {
    if (target == candidate) throw std::invalid_argument("workloadSimilarity: target == candidate");
    const auto& ta = runs(target);
    const auto& cb = runs(candidate);
    double scaleSum = 0.0;
    double weighted = 0.0;
    for (const auto& rn : ta) {
        for (const auto& rm : cb) {
            if (rn.config.machineType != rm.config.machineType) continue;
            const PairSimilarity ps = pairSimilarity(rn, rm);
            scaleSum += ps.scale;
            weighted += ps.scale * ps.score;
        }
    }
    if (scaleSum <= 0.0) return 0.5;  // no machine-type-matching pair
    return weighted / scaleSum;
}

std::vector<SimilarityResult> Repository::selectSupport(const std::string& target, int k) const {
    std::vector<SimilarityResult> results;
    if (k <= 0) return results;
    const bool haveTarget = has(target) && !byWorkload_.at(target).empty();
    for (const auto& [id, rs] : byWorkload_) {
        if (id == target) continue;
        if (rs.size() < 2) continue;  // cannot train a rankable model
        SimilarityResult r;
        r.workloadId = id;
        r.score = haveTarget ? workloadSimilarity(target, id) : 0.5;
        results.push_back(r);
    }
    std::stable_sort(results.begin(), results.end(), [](const SimilarityResult& a, const SimilarityResult& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.workloadId < b.workloadId;
    });
    if (results.size() > static_cast<std::size_t>(k)) results.resize(static_cast<std::size_t>(k));
    return results;
}

std::string runRecordToJson(const RunRecord& r) {
    json j;
    j["workloadId"] = r.workloadId;
    j["config"] = {
        {"machineType", r.config.machineType},
        {"nodeCount", r.config.nodeCount},
        {"perNode",
         {{"vcpus", r.config.perNode.vcpus},
          {"memGb", r.config.perNode.memGb},
          {"pricePerHourUsd", r.config.perNode.pricePerHourUsd},
          {"powerIdleW", r.config.perNode.powerIdleW},
          {"powerFullW", r.config.perNode.powerFullW}}},
    };
    json metrics;
    for (int i = 0; i < kMetricCount; ++i) {
        metrics[kMetricNames[i]] = {{"p10", r.metrics.metrics[i].p10},
                                    {"p50", r.metrics.metrics[i].p50},
                                    {"p90", r.metrics.metrics[i].p90}};
    }
    j["metrics"] = metrics;
    j["measures"] = {{"runtimeS", r.measures.runtimeS},
                     {"costUsd", r.measures.costUsd},
                     {"energyWh", r.measures.energyWh}};
    j["sequence"] = r.sequence;
    return j.dump(2);
}

namespace {

json requireField(const json& j, const char* field, const std::string& context) {
    if (!j.contains(field))
        throw std::runtime_error(context + ": missing field '" + field + "'");
    return j.at(field);
}

}  // namespace

RunRecord runRecordFromJson(const std::string& text, const std::string& context) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(context + ": malformed JSON (" + e.what() + ")");
    }
    RunRecord r;
    r.workloadId = requireField(j, "workloadId", context).get<std::string>();
    const json cfg = requireField(j, "config", context);
    r.config.machineType = requireField(cfg, "machineType", context + ".config").get<std::string>();
    r.config.nodeCount = requireField(cfg, "nodeCount", context + ".config").get<int>();
    const json pn = requireField(cfg, "perNode", context + ".config");
    r.config.perNode.vcpus = requireField(pn, "vcpus", context + ".config.perNode").get<int>();
    r.config.perNode.memGb = requireField(pn, "memGb", context + ".config.perNode").get<double>();
    r.config.perNode.pricePerHourUsd =
        requireField(pn, "pricePerHourUsd", context + ".config.perNode").get<double>();
    r.config.perNode.powerIdleW = requireField(pn, "powerIdleW", context + ".config.perNode").get<double>();
    r.config.perNode.powerFullW = requireField(pn, "powerFullW", context + ".config.perNode").get<double>();
    const json metrics = requireField(j, "metrics", context);
    for (int i = 0; i < kMetricCount; ++i) {
        const json m = requireField(metrics, kMetricNames[i], context + ".metrics");
        const std::string mctx = context + ".metrics." + kMetricNames[i];
        r.metrics.metrics[i].p10 = requireField(m, "p10", mctx).get<double>();
        r.metrics.metrics[i].p50 = requireField(m, "p50", mctx).get<double>();
        r.metrics.metrics[i].p90 = requireField(m, "p90", mctx).get<double>();
    }
    const json ms = requireField(j, "measures", context);
    r.measures.runtimeS = requireField(ms, "runtimeS", context + ".measures").get<double>();
    r.measures.costUsd = requireField(ms, "costUsd", context + ".measures").get<double>();
    r.measures.energyWh = requireField(ms, "energyWh", context + ".measures").get<double>();
    r.sequence = requireField(j, "sequence", context).get<int>();
    return r;
}

void Repository::appendToDisk(const std::filesystem::path& root, const RunRecord& record) {
    const std::filesystem::path dir = root / record.workloadId;
    std::filesystem::create_directories(dir);
    const std::filesystem::path file = dir / (std::to_string(record.sequence) + ".json");
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << runRecordToJson(record) << "\n";
}

void Repository::store(const std::filesystem::path& root) const {
    std::filesystem::create_directories(root);
    for (const auto& [_, rs] : byWorkload_)
        for (const auto& r : rs) appendToDisk(root, r);
}

Repository Repository::load(const std::filesystem::path& root) {
    Repository repo;
    if (!std::filesystem::exists(root)) return repo;
    std::vector<std::filesystem::path> dirs;
    for (const auto& entry : std::filesystem::directory_iterator(root))
        if (entry.is_directory()) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& dir : dirs) {
        std::vector<std::filesystem::path> files;
        for (const auto& f : std::filesystem::directory_iterator(dir))
            if (f.path().extension() == ".json") files.push_back(f.path());
        std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
            return std::stoi(a.stem().string()) < std::stoi(b.stem().string());
        });
        for (const auto& f : files) {
            std::ifstream in(f);
            std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            repo.add(runRecordFromJson(text, f.string()));
        }
    }
    return repo;
}

}  // namespace karasu

#ifndef KARASU_REPOSITORY_HPP
#define KARASU_REPOSITORY_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "karasu/types.hpp"

namespace karasu {

/// Pools samples across time and machines into per-metric 10/50/90 quantiles.
/// raw is 6 rows (canonical metric order) of at least one sample each.
MetricVector aggregate(const std::vector<std::vector<double>>& raw);

/// Empirical quantile with linear interpolation between order statistics
/// (type-7). p in [0, 1].
double quantileLinear(std::vector<double> samples, double p);

struct PairSimilarity {
    double scale = 0.0;  // in (0, 1]
    double score = 0.0;  // in [0, 1]
};

/// Similarity of two runs on the same machine type: node-count scale factor
/// 1/2^|log2 nA - log2 nB| and Pearson score over the flattened 18-value
/// metric vectors, mapped to [0, 1]. Zero-variance vectors score 0.5.
PairSimilarity pairSimilarity(const RunRecord& a, const RunRecord& b);

struct SimilarityResult {
    std::string workloadId;
    double score = 0.0;
};

/// Shared run-tuple store keyed by opaque workload id. Append-only.
class Repository {
   public:
    Repository() = default;

    void add(const RunRecord& record);
    const std::vector<RunRecord>& runs(const std::string& workloadId) const;
    bool has(const std::string& workloadId) const { return byWorkload_.count(workloadId) > 0; }
    std::vector<std::string> workloadIds() const;
    std::size_t totalRuns() const;

    /// Scale-weighted average pair score over machine-type-matching run
    /// pairs; 0.5 when no pair matches.
    double workloadSimilarity(const std::string& target, const std::string& candidate) const;

    /// Top-k candidates by similarity (desc, ties by id asc); candidates with
    /// fewer than 2 runs are excluded.
    std::vector<SimilarityResult> selectSupport(const std::string& target, int k) const;

    /// Directory persistence: <root>/<workloadId>/<sequence>.json
    void store(const std::filesystem::path& root) const;
    static Repository load(const std::filesystem::path& root);

    /// Appends one record to an on-disk repository without rewriting it.
    static void appendToDisk(const std::filesystem::path& root, const RunRecord& record);

   private:
    std::map<std::string, std::vector<RunRecord>> byWorkload_;
};

/// JSON (de)serialization of the shareable tuple; schema is fixed.
std::string runRecordToJson(const RunRecord& r);
RunRecord runRecordFromJson(const std::string& text, const std::string& context);

}  // namespace karasu

#endif

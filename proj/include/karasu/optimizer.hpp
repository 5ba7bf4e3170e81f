#ifndef KARASU_OPTIMIZER_HPP
#define KARASU_OPTIMIZER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "karasu/repository.hpp"
#include "karasu/search_space.hpp"
#include "karasu/types.hpp"

namespace karasu {

struct Constraint {
    MeasureKind kind = MeasureKind::runtime;
    double bound = 0.0;  // measure <= bound
};

struct SessionBudget {
    int maxRuns = 20;
    int minRuns = 6;
    double eiStopFraction = 0.10;
};

/// How support workloads are picked from the shared store.
enum class SupportMode {
    similarity,       // top-k by metric-vector similarity
    randomFromStore,  // uniform among eligible candidates, seeded
};

struct ProfilingSession {
    std::string workloadId;
    SearchSpace space;
    std::vector<MeasureKind> objectives;  // 1 or 2 of {cost, energy}
    std::vector<Constraint> constraints;
    std::vector<RunRecord> history;
    SessionBudget budget;
    int supportCount = 3;
    std::uint64_t rngSeed = 0;
    SupportMode supportMode = SupportMode::similarity;

    ProfilingSession(std::string id, SearchSpace s) : workloadId(std::move(id)), space(std::move(s)) {}

    bool profiled(const ResourceConfiguration& c) const;
    std::vector<ResourceConfiguration> unprofiled() const;
    bool isFeasible(const RunRecord& r) const;
    /// Min observed value of an objective over feasible history.
    std::optional<double> bestFeasible(MeasureKind objective) const;
};

enum class ProposalKind { randomInit, modelGuided };
enum class StopReason { none, acquisitionBelowThreshold, budgetExhausted, spaceExhausted };

const char* stopReasonName(StopReason r);

struct Proposal {
    ResourceConfiguration config;
    double score = 0.0;
    ProposalKind kind = ProposalKind::randomInit;
    bool shouldStop = false;
    StopReason stopReason = StopReason::none;
};

/// Optional introspection of a model-guided proposal.
struct ProposalDiagnostics {
    bool wantTargetOnly = false;  // set before the call to also compute the
                                  // proposal the target-only model would make
    std::map<MeasureKind, std::vector<double>> ensembleWeights;
    double maxSupportWeight = 0.0;
    std::optional<ResourceConfiguration> targetOnlyProposal;
};

/// Next configuration to profile. Baseline mode starts with 3 seeded random
/// picks and then maximizes constrained EI (or MC-EHVI for two objectives)
/// over the unprofiled configurations; Karasu mode starts with 1 random pick
/// and uses ranking-weighted ensembles built from the shared store.
Proposal propose(const ProfilingSession& session, const Repository& store, bool useKarasu,
                 ProposalDiagnostics* diag = nullptr);

/// Records an executed run: appends to session history and to the shared
/// store (sequence = history size). Infeasible runs are kept as observations.
void observe(ProfilingSession& session, const ResourceConfiguration& config, RunRecord record,
             Repository& store, const std::filesystem::path* diskRoot = nullptr);

struct SessionResult {
    std::vector<RunRecord> history;
    std::map<MeasureKind, std::optional<double>> bestFeasible;
    int stoppedAt = 0;
    StopReason stopReason = StopReason::none;
};

using BlackBox = std::function<RunRecord(const ResourceConfiguration&)>;

/// Loops propose/observe until the session stops. Deterministic given the
/// session seed and a deterministic black box.
SessionResult runSession(const BlackBox& blackBox, ProfilingSession session, Repository& store,
                         bool useKarasu, const std::filesystem::path* diskRoot = nullptr);

}  // namespace karasu

#endif

#include "karasu/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <stdexcept>

#include "karasu/acquisition.hpp"
#include "karasu/ensemble.hpp"
#include "karasu/gp.hpp"
#include "karasu/rng.hpp"

namespace karasu {

namespace {

constexpr int kWeightSampleCount = 256;
constexpr int kEhviSampleCount = 256;
constexpr double kNoiseVariance = 0.1;  // standardized units

ObservationSet observationsFor(const std::vector<RunRecord>& runs, MeasureKind kind,
                               const SearchSpace& space) {
    ObservationSet obs;
    obs.measureKind = kind;
    for (const auto& r : runs) {
        if (!space.contains(r.config)) continue;
        obs.add(space.encode(r.config), measureValue(r.measures, kind));
    }
    return obs;
}

std::vector<std::string> pickSupportIds(const ProfilingSession& session, const Repository& store) {
    if (session.supportCount <= 0) return {};
    if (session.supportMode == SupportMode::similarity) {
        std::vector<std::string> ids;
        for (const auto& r : store.selectSupport(session.workloadId, session.supportCount))
            ids.push_back(r.workloadId);
        return ids;
    }
    // seeded uniform choice among eligible candidates
    std::vector<std::string> eligible;
    for (const auto& id : store.workloadIds()) {
        if (id == session.workloadId) continue;
        if (store.runs(id).size() < 2) continue;
        eligible.push_back(id);
    }
    Rng rng(Rng::deriveSeed(session.rngSeed, 0x52, session.history.size()));
    std::vector<std::string> ids;
    while (!eligible.empty() && ids.size() < static_cast<std::size_t>(session.supportCount)) {
        const std::size_t pick = rng.below(eligible.size());
        ids.push_back(eligible[pick]);
        eligible.erase(eligible.begin() + static_cast<std::ptrdiff_t>(pick));
    }
    return ids;
}

/// One predictive model per measure, either a plain GP on session history or
/// an RGPE ensemble over store-backed support models.
std::map<MeasureKind, std::shared_ptr<const PosteriorModel>> buildModels(
    const ProfilingSession& session, const Repository& store, bool useKarasu, bool withSupports,
    ProposalDiagnostics* diag) {
    std::set<MeasureKind> kinds(session.objectives.begin(), session.objectives.end());
    for (const auto& c : session.constraints) kinds.insert(c.kind);

    std::vector<std::string> supportIds;
    if (useKarasu && withSupports) supportIds = pickSupportIds(session, store);

    std::map<MeasureKind, std::shared_ptr<const PosteriorModel>> models;
    for (MeasureKind kind : kinds) {
        const ObservationSet targetObs = observationsFor(session.history, kind, session.space);
        auto target = std::make_shared<SurrogateModel>(SurrogateModel::fit(targetObs, kNoiseVariance));
        if (!useKarasu) {
            models[kind] = target;
            continue;
        }
        std::vector<std::shared_ptr<const SurrogateModel>> supports;
        for (const auto& id : supportIds) {
            const ObservationSet obs = observationsFor(store.runs(id), kind, session.space);
            if (obs.size() < 2) continue;  // not rankable
            supports.push_back(
                std::make_shared<SurrogateModel>(SurrogateModel::fit(obs, kNoiseVariance)));
        }
        const std::uint64_t weightSeed =
            Rng::deriveSeed(session.rngSeed, 0x66 + static_cast<int>(kind), session.history.size());
        std::vector<double> weights =
            computeWeights(*target, supports, targetObs, kWeightSampleCount, weightSeed);
        std::vector<std::shared_ptr<const SurrogateModel>> members;
        members.push_back(target);
        for (auto& s : supports) members.push_back(s);
        auto ensemble = std::make_shared<EnsembleModel>(std::move(members), std::move(weights));
        if (diag) {
            diag->ensembleWeights[kind] = ensemble->weights();
            diag->maxSupportWeight = std::max(diag->maxSupportWeight, ensemble->maxSupportWeight());
        }
        models[kind] = ensemble;
    }
    return models;
}

struct GuidedChoice {
    ResourceConfiguration config;
    double score = 0.0;
};

GuidedChoice argmaxAcquisition(const ProfilingSession& session,
                               const std::map<MeasureKind, std::shared_ptr<const PosteriorModel>>& models,
                               const std::vector<ResourceConfiguration>& candidates) {
    AcquisitionContext ctx;
    for (MeasureKind kind : session.objectives) ctx.objectiveModels.push_back(models.at(kind));
    for (const auto& c : session.constraints) {
        ctx.constraintModels.push_back(models.at(c.kind));
        ctx.constraintBounds.push_back(c.bound);
    }
    for (MeasureKind kind : session.objectives) ctx.bestFeasible.push_back(session.bestFeasible(kind));

    const bool moo = session.objectives.size() == 2;
    std::vector<std::array<double, 2>> front;
    bool anyFeasible = false;
    for (const auto& b : ctx.bestFeasible) anyFeasible = anyFeasible || b.has_value();
    if (moo && anyFeasible) {
        std::array<double, 2> worst{0.0, 0.0};
        for (const auto& r : session.history) {
            if (!session.isFeasible(r)) continue;
            const std::array<double, 2> p{measureValue(r.measures, session.objectives[0]),
                                          measureValue(r.measures, session.objectives[1])};
            front.push_back(p);
            worst[0] = std::max(worst[0], p[0]);
            worst[1] = std::max(worst[1], p[1]);
        }
        ctx.referencePoint = {worst[0] * 1.1, worst[1] * 1.1};
    }
    const std::uint64_t ehviSeed = Rng::deriveSeed(session.rngSeed, 0x77, session.history.size());

    GuidedChoice best;
    double bestTieMean = 0.0;
    bool haveBest = false;
    for (const auto& cand : candidates) {
        const EncodedConfig x = session.space.encode(cand);
        double score;
        if (!moo) {
            score = constrainedScore(ctx, x);
        } else if (!anyFeasible) {
            score = 1.0;  // pure feasibility search
            for (std::size_t i = 0; i < ctx.constraintModels.size(); ++i)
                score *= probabilityOfFeasibility(*ctx.constraintModels[i], x, ctx.constraintBounds[i]);
        } else {
            score = mcEhvi(ctx, x, front, kEhviSampleCount, ehviSeed);
        }
        const double tieMean = models.at(session.objectives.front())->posterior(x).mean;
        const bool better =
            !haveBest || score > best.score ||
            (score == best.score && (tieMean < bestTieMean ||
                                     (tieMean == bestTieMean &&
                                      session.space.indexOf(cand) < session.space.indexOf(best.config))));
        if (better) {
            best.config = cand;
            best.score = score;
            bestTieMean = tieMean;
            haveBest = true;
        }
    }
    return best;
}

}  // namespace

bool ProfilingSession::profiled(const ResourceConfiguration& c) const {
    for (const auto& r : history)
        if (r.config.samePoint(c)) return true;
    return false;
}

std::vector<ResourceConfiguration> ProfilingSession::unprofiled() const {
    std::vector<ResourceConfiguration> out;
    for (const auto& c : space.configurations())
        if (!profiled(c)) out.push_back(c);
    return out;
}

bool ProfilingSession::isFeasible(const RunRecord& r) const {
    for (const auto& c : constraints)
        if (measureValue(r.measures, c.kind) > c.bound) return false;
    return true;
}

std::optional<double> ProfilingSession::bestFeasible(MeasureKind objective) const {
    std::optional<double> best;
    for (const auto& r : history) {
        if (!isFeasible(r)) continue;
        const double v = measureValue(r.measures, objective);
        if (!best || v < *best) best = v;
    }
    return best;
}

const char* stopReasonName(StopReason r) {
    switch (r) {
        case StopReason::none: return "none";
        case StopReason::acquisitionBelowThreshold: return "acquisitionBelowThreshold";
        case StopReason::budgetExhausted: return "budgetExhausted";
        case StopReason::spaceExhausted: return "spaceExhausted";
    }
    return "?";
}

Proposal propose(const ProfilingSession& session, const Repository& store, bool useKarasu,
                 ProposalDiagnostics* diag) {
    if (session.objectives.empty() || session.objectives.size() > 2)
        throw std::invalid_argument("session must have 1 or 2 objectives");
    Proposal p;
    if (static_cast<int>(session.history.size()) >= session.budget.maxRuns) {
        p.shouldStop = true;
        p.stopReason = StopReason::budgetExhausted;
        return p;
    }
    const std::vector<ResourceConfiguration> candidates = session.unprofiled();
    if (candidates.empty()) {
        p.shouldStop = true;
        p.stopReason = StopReason::spaceExhausted;
        return p;
    }

    const int initCount = useKarasu ? 1 : 3;
    if (static_cast<int>(session.history.size()) < initCount) {
        Rng rng(Rng::deriveSeed(session.rngSeed, 0x41, session.history.size()));
        p.config = candidates[rng.below(candidates.size())];
        p.kind = ProposalKind::randomInit;
        return p;
    }

    auto models = buildModels(session, store, useKarasu, /*withSupports=*/true, diag);
    const GuidedChoice choice = argmaxAcquisition(session, models, candidates);
    p.config = choice.config;
    p.score = choice.score;
    p.kind = ProposalKind::modelGuided;

    if (diag && diag->wantTargetOnly) {
        auto soloModels = buildModels(session, store, useKarasu, /*withSupports=*/false, nullptr);
        diag->targetOnlyProposal = argmaxAcquisition(session, soloModels, candidates).config;
    }

    const std::optional<double> best = session.bestFeasible(session.objectives.front());
    if (static_cast<int>(session.history.size()) >= session.budget.minRuns && best &&
        p.score <= session.budget.eiStopFraction * *best) {
        p.shouldStop = true;
        p.stopReason = StopReason::acquisitionBelowThreshold;
    }
    return p;
}

void observe(ProfilingSession& session, const ResourceConfiguration& config, RunRecord record,
             Repository& store, const std::filesystem::path* diskRoot) {
    if (!session.space.contains(config))
        throw std::invalid_argument("observed configuration is not in the search space");
    if (session.profiled(config))
        throw std::invalid_argument("configuration already profiled in this session");
    record.workloadId = session.workloadId;
    record.config = config;
    record.sequence = static_cast<int>(session.history.size()) + 1;
    session.history.push_back(record);
    store.add(record);
    if (diskRoot) Repository::appendToDisk(*diskRoot, record);
}

SessionResult runSession(const BlackBox& blackBox, ProfilingSession session, Repository& store,
                         bool useKarasu, const std::filesystem::path* diskRoot) {
    SessionResult result;
    while (true) {
        const Proposal p = propose(session, store, useKarasu);
        if (p.shouldStop) {
            result.stopReason = p.stopReason;
            break;
        }
        RunRecord rec = blackBox(p.config);
        observe(session, p.config, rec, store, diskRoot);
    }
    result.history = session.history;
    for (MeasureKind kind : session.objectives) result.bestFeasible[kind] = session.bestFeasible(kind);
    result.stoppedAt = static_cast<int>(session.history.size());
    return result;
}

}  // namespace karasu

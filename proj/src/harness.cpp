#include "karasu/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "karasu/acquisition.hpp"
#include "karasu/rng.hpp"

namespace karasu {

using nlohmann::json;

Scenario scenarioFromName(const std::string& name) {
    if (name == "boost") return Scenario::boost;
    if (name == "cases") return Scenario::cases;
    if (name == "heterogeneous") return Scenario::heterogeneous;
    if (name == "moo") return Scenario::moo;
    throw std::invalid_argument("unknown scenario: " + name);
}

CaseFilter caseFilterFromName(const std::string& name) {
    if (name == "A") return CaseFilter::A;
    if (name == "B") return CaseFilter::B;
    if (name == "C") return CaseFilter::C;
    if (name == "D") return CaseFilter::D;
    if (name == "none") return CaseFilter::none;
    throw std::invalid_argument("unknown case filter: " + name);
}

namespace {

const char* scenarioName(Scenario s) {
    switch (s) {
        case Scenario::boost: return "boost";
        case Scenario::cases: return "cases";
        case Scenario::heterogeneous: return "heterogeneous";
        case Scenario::moo: return "moo";
    }
    return "?";
}

std::uint64_t hashName(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

std::string formatDouble(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

ExperimentPlan loadPlan(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": malformed JSON (" + e.what() + ")");
    }
    ExperimentPlan plan;
    plan.scenario = scenarioFromName(j.at("scenario").get<std::string>());
    if (j.contains("runtimePercentiles"))
        plan.runtimePercentiles = j.at("runtimePercentiles").get<std::vector<double>>();
    for (std::size_t i = 0; i < plan.runtimePercentiles.size(); ++i) {
        const double p = plan.runtimePercentiles[i];
        if (p <= 0.0 || p >= 1.0) throw std::runtime_error("runtime percentiles must lie in (0,1)");
        if (i > 0 && p <= plan.runtimePercentiles[i - 1])
            throw std::runtime_error("runtime percentiles must be strictly increasing");
    }
    plan.repetitions = j.value("repetitions", 10);
    if (plan.repetitions < 1) throw std::runtime_error("repetitions must be >= 1");
    if (j.contains("modelCounts")) plan.modelCounts = j.at("modelCounts").get<std::vector<int>>();
    plan.caseFilter = caseFilterFromName(j.value("caseFilter", "none"));
    if (j.contains("seeds")) plan.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("budget")) {
        const json b = j.at("budget");
        plan.budget.maxRuns = b.value("maxRuns", 20);
        plan.budget.minRuns = b.value("minRuns", 6);
        plan.budget.eiStopFraction = b.value("eiStopFraction", 0.10);
    }
    if (!j.contains("workloads")) throw std::runtime_error("plan needs a workloads list");
    for (const json& w : j.at("workloads")) {
        PlannedWorkload pw;
        pw.name = w.at("name").get<std::string>();
        pw.meta.framework = w.value("framework", "spark");
        pw.meta.algorithm = w.value("algorithm", "pagerank");
        pw.meta.datasetTag = w.value("dataset", "ds0");
        pw.spec.seed = w.value("seed", 0ULL);
        pw.spec.workScale = w.value("workScale", 2000.0);
        pw.spec.noiseLevel = w.value("noiseLevel", 0.05);
        pw.spec.archetype = w.value("archetype", 0);
        plan.workloads.push_back(std::move(pw));
    }
    if (plan.workloads.empty()) throw std::runtime_error("plan needs at least one workload");
    return plan;
}

double computeRuntimeTarget(const std::vector<double>& completedRuntimes, double percentile) {
    if (completedRuntimes.empty())
        throw std::invalid_argument("computeRuntimeTarget: no completed runs");
    return quantileLinear(completedRuntimes, percentile);
}

std::vector<std::string> applyCaseFilter(const std::map<std::string, WorkloadMeta>& candidates,
                                         const std::string& targetName, const WorkloadMeta& targetMeta,
                                         CaseFilter filter) {
    std::vector<std::string> out;
    for (const auto& [name, meta] : candidates) {
        if (name == targetName) continue;
        const bool sameF = meta.framework == targetMeta.framework;
        const bool sameA = meta.algorithm == targetMeta.algorithm;
        const bool sameD = meta.datasetTag == targetMeta.datasetTag;
        bool keep = false;
        switch (filter) {
            case CaseFilter::A: keep = !sameF && !sameA && !sameD; break;
            case CaseFilter::B: keep = sameF && !sameA && !sameD; break;
            case CaseFilter::C: keep = sameF && sameA && !sameD; break;
            case CaseFilter::D: keep = sameF && sameA && sameD; break;
            case CaseFilter::none: keep = true; break;
        }
        if (keep) out.push_back(name);
    }
    return out;
}

Repository truncateHeterogeneous(const Repository& store, std::uint64_t seed) {
    Repository out;
    for (const auto& id : store.workloadIds()) {
        const auto& rs = store.runs(id);
        const int n = static_cast<int>(rs.size());
        int k = n;
        if (n > 3) {
            Rng rng(Rng::deriveSeed(seed, hashName(id)));
            k = 3 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 2)));  // U{3..n}
        }
        for (int i = 0; i < k; ++i) out.add(rs[static_cast<std::size_t>(i)]);
    }
    return out;
}

namespace {

struct WorkloadContext {
    PlannedWorkload planned;
    std::vector<RunRecord> replay;         // deterministic record per config
    std::vector<double> runtimes;          // same order
    double maxCost = 0.0, maxEnergy = 0.0; // over the whole space
};

struct PoolEntry {
    std::string id;          // opaque store id of the prior session
    std::string sourceName;  // planned workload it came from
    WorkloadMeta meta;
    std::vector<RunRecord> runs;
};

void addPrefixRows(std::vector<ResultRow>& rows, const ExperimentPlan& plan,
                   const std::string& workloadName, double percentile, int repetition,
                   const std::string& method, const SessionResult& result, double runtimeTarget,
                   bool moo, double refCost, double refEnergy) {
    std::optional<double> bestCost, bestEnergy;
    double cumCost = 0.0, cumTime = 0.0;
    int timeouts = 0;
    std::vector<std::array<double, 2>> front;
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        const RunRecord& r = result.history[i];
        cumCost += r.measures.costUsd;
        cumTime += r.measures.runtimeS;
        const bool feasible = r.measures.runtimeS <= runtimeTarget;
        if (!feasible) ++timeouts;
        if (feasible) {
            if (!bestCost || r.measures.costUsd < *bestCost) bestCost = r.measures.costUsd;
            if (!bestEnergy || r.measures.energyWh < *bestEnergy) bestEnergy = r.measures.energyWh;
            if (moo) front.push_back({r.measures.costUsd, r.measures.energyWh});
        }
        ResultRow row;
        row.scenario = scenarioName(plan.scenario);
        row.workloadId = workloadName;
        row.percentile = percentile;
        row.repetition = repetition;
        row.iteration = static_cast<int>(i) + 1;
        row.method = method;
        row.bestFeasibleCost = bestCost;
        row.bestFeasibleEnergy = bestEnergy;
        row.cumulativeSearchCost = cumCost;
        row.cumulativeSearchTimeS = cumTime;
        row.timeoutCount = timeouts;
        if (moo) row.hypervolume = hypervolume2d(front, {refCost, refEnergy});
        row.stoppedAt = result.stoppedAt;
        row.stopReason = stopReasonName(result.stopReason);
        rows.push_back(std::move(row));
    }
}

}  // namespace

ExperimentOutput runExperiment(const ExperimentPlan& plan) {
    const SearchSpace space = defaultSyntheticSpace();
    ExperimentOutput out;

    std::vector<WorkloadContext> contexts;
    std::map<std::string, WorkloadMeta> metaByName;
    for (const auto& pw : plan.workloads) {
        WorkloadContext ctx;
        ctx.planned = pw;
        SyntheticWorkload synth(pw.spec, space);
        for (const auto& c : space.configurations()) {
            RunRecord r = synth.run(c);
            ctx.runtimes.push_back(r.measures.runtimeS);
            ctx.maxCost = std::max(ctx.maxCost, r.measures.costUsd);
            ctx.maxEnergy = std::max(ctx.maxEnergy, r.measures.energyWh);
            ctx.replay.push_back(std::move(r));
        }
        metaByName[pw.name] = pw.meta;
        contexts.push_back(std::move(ctx));
    }

    // per-target optima by exhaustive replay
    for (const auto& ctx : contexts) {
        for (double p : plan.runtimePercentiles) {
            OptimumRow opt;
            opt.workloadId = ctx.planned.name;
            opt.percentile = p;
            opt.runtimeTargetS = computeRuntimeTarget(ctx.runtimes, p);
            opt.optimalCost = std::numeric_limits<double>::infinity();
            opt.optimalEnergy = std::numeric_limits<double>::infinity();
            for (const auto& r : ctx.replay) {
                if (r.measures.runtimeS > opt.runtimeTargetS) continue;
                opt.optimalCost = std::min(opt.optimalCost, r.measures.costUsd);
                opt.optimalEnergy = std::min(opt.optimalEnergy, r.measures.energyWh);
            }
            out.optima.push_back(opt);
        }
    }

    // prior-session pool: one baseline session per workload and percentile,
    // used as shared-repository content by every scenario
    std::vector<PoolEntry> pool;
    for (const auto& ctx : contexts) {
        SyntheticWorkload synth(ctx.planned.spec, space);
        for (std::size_t pi = 0; pi < plan.runtimePercentiles.size(); ++pi) {
            const double target = computeRuntimeTarget(ctx.runtimes, plan.runtimePercentiles[pi]);
            PoolEntry entry;
            entry.id = ctx.planned.name + "~p" + std::to_string(pi);
            entry.sourceName = ctx.planned.name;
            entry.meta = ctx.planned.meta;
            ProfilingSession session(entry.id, space);
            session.objectives = {MeasureKind::cost};
            session.constraints = {{MeasureKind::runtime, target}};
            session.budget = plan.budget;
            session.rngSeed = Rng::deriveSeed(0xBEEF, hashName(entry.id));
            Repository scratch;
            const SessionResult res =
                runSession([&](const ResourceConfiguration& c) { return synth.run(c); }, session,
                           scratch, /*useKarasu=*/false);
            entry.runs = res.history;
            pool.push_back(std::move(entry));
        }
    }

    const bool moo = plan.scenario == Scenario::moo;
    for (const auto& ctx : contexts) {
        SyntheticWorkload synth(ctx.planned.spec, space);
        for (std::size_t pi = 0; pi < plan.runtimePercentiles.size(); ++pi) {
            const double percentile = plan.runtimePercentiles[pi];
            const double target = computeRuntimeTarget(ctx.runtimes, percentile);

            // snapshot of store content this target is allowed to see
            Repository snapshot;
            if (plan.scenario == Scenario::boost || plan.scenario == Scenario::moo) {
                for (const auto& e : pool)
                    if (e.sourceName == ctx.planned.name)
                        for (const auto& r : e.runs) snapshot.add(r);
            } else {
                std::map<std::string, WorkloadMeta> candidateMeta;
                std::map<std::string, const PoolEntry*> bySession;
                for (const auto& e : pool) {
                    candidateMeta[e.id] = e.meta;
                    bySession[e.id] = &e;
                }
                const auto allowed =
                    applyCaseFilter(candidateMeta, "", ctx.planned.meta, plan.caseFilter);
                for (const auto& id : allowed) {
                    // exclude the target's own prior sessions unless Case D asks for them
                    if (bySession.at(id)->sourceName == ctx.planned.name &&
                        plan.caseFilter != CaseFilter::D && plan.caseFilter != CaseFilter::none)
                        continue;
                    for (const auto& r : bySession.at(id)->runs) snapshot.add(r);
                }
            }

            for (int rep = 0; rep < plan.repetitions; ++rep) {
                const std::uint64_t repSeed = rep < static_cast<int>(plan.seeds.size())
                                                  ? plan.seeds[static_cast<std::size_t>(rep)]
                                                  : static_cast<std::uint64_t>(rep) + 1;
                const std::uint64_t sessionSeed =
                    Rng::deriveSeed(repSeed, hashName(ctx.planned.name), pi);

                Repository repStore = snapshot;  // repetition isolation
                if (plan.scenario == Scenario::heterogeneous)
                    repStore = truncateHeterogeneous(repStore, Rng::deriveSeed(repSeed, 0x48, pi));

                auto makeSession = [&](const std::string& id) {
                    ProfilingSession s(id, space);
                    s.objectives = moo ? std::vector<MeasureKind>{MeasureKind::cost, MeasureKind::energy}
                                       : std::vector<MeasureKind>{MeasureKind::cost};
                    s.constraints = {{MeasureKind::runtime, target}};
                    s.budget = plan.budget;
                    s.rngSeed = sessionSeed;
                    s.supportMode = plan.scenario == Scenario::boost ? SupportMode::randomFromStore
                                                                     : SupportMode::similarity;
                    return s;
                };
                const auto blackBox = [&](const ResourceConfiguration& c) { return synth.run(c); };

                {
                    Repository store = repStore;
                    const std::string id = ctx.planned.name + "|p" + std::to_string(pi) + "|r" +
                                           std::to_string(rep) + "|baseline";
                    const SessionResult res = runSession(blackBox, makeSession(id), store, false);
                    addPrefixRows(out.rows, plan, ctx.planned.name, percentile, rep, "baseline", res,
                                  target, moo, ctx.maxCost * 1.1, ctx.maxEnergy * 1.1);
                }
                for (int k : plan.modelCounts) {
                    Repository store = repStore;
                    const std::string id = ctx.planned.name + "|p" + std::to_string(pi) + "|r" +
                                           std::to_string(rep) + "|karasu" + std::to_string(k);
                    ProfilingSession s = makeSession(id);
                    s.supportCount = k;
                    const SessionResult res = runSession(blackBox, std::move(s), store, true);
                    addPrefixRows(out.rows, plan, ctx.planned.name, percentile, rep,
                                  "karasu_m" + std::to_string(k), res, target, moo, ctx.maxCost * 1.1,
                                  ctx.maxEnergy * 1.1);
                }
            }
        }
    }
    return out;
}

namespace {
constexpr const char* kResultHeader =
    "scenario,workloadId,percentile,repetition,iteration,method,bestFeasibleCost,"
    "bestFeasibleEnergy,cumulativeSearchCost,cumulativeSearchTimeS,timeoutCount,hypervolume,"
    "stoppedAt,stopReason";
}

void writeResultsCsv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
    std::ofstream outFile(path);
    if (!outFile) throw std::runtime_error("cannot write " + path.string());
    outFile << kResultHeader << "\n";
    for (const auto& r : rows) {
        outFile << r.scenario << ',' << r.workloadId << ',' << formatDouble(r.percentile) << ','
                << r.repetition << ',' << r.iteration << ',' << r.method << ','
                << (r.bestFeasibleCost ? formatDouble(*r.bestFeasibleCost) : "") << ','
                << (r.bestFeasibleEnergy ? formatDouble(*r.bestFeasibleEnergy) : "") << ','
                << formatDouble(r.cumulativeSearchCost) << ','
                << formatDouble(r.cumulativeSearchTimeS) << ',' << r.timeoutCount << ','
                << (r.hypervolume ? formatDouble(*r.hypervolume) : "") << ',' << r.stoppedAt << ','
                << r.stopReason << "\n";
    }
}

void writeOptimaCsv(const std::filesystem::path& path, const std::vector<OptimumRow>& optima) {
    std::ofstream outFile(path);
    if (!outFile) throw std::runtime_error("cannot write " + path.string());
    outFile << "workloadId,percentile,runtimeTargetS,optimalCost,optimalEnergy\n";
    for (const auto& o : optima)
        outFile << o.workloadId << ',' << formatDouble(o.percentile) << ','
                << formatDouble(o.runtimeTargetS) << ',' << formatDouble(o.optimalCost) << ','
                << formatDouble(o.optimalEnergy) << "\n";
}

namespace {

std::vector<std::string> splitCsv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    // trailing empty field is dropped by getline; pad
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::optional<double> parseOptional(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

}  // namespace

std::vector<ResultRow> readResultsCsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file " + path.string());
    std::vector<ResultRow> rows;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        if (lineNo == 1 && line.rfind("scenario,", 0) == 0) continue;
        const auto f = splitCsv(line);
        if (f.size() != 14)
            throw std::runtime_error(path.string() + " line " + std::to_string(lineNo) +
                                     ": expected 14 columns");
        ResultRow r;
        r.scenario = f[0];
        r.workloadId = f[1];
        r.percentile = std::stod(f[2]);
        r.repetition = std::stoi(f[3]);
        r.iteration = std::stoi(f[4]);
        r.method = f[5];
        r.bestFeasibleCost = parseOptional(f[6]);
        r.bestFeasibleEnergy = parseOptional(f[7]);
        r.cumulativeSearchCost = std::stod(f[8]);
        r.cumulativeSearchTimeS = std::stod(f[9]);
        r.timeoutCount = std::stoi(f[10]);
        r.hypervolume = parseOptional(f[11]);
        r.stoppedAt = std::stoi(f[12]);
        r.stopReason = f[13];
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<OptimumRow> readOptimaCsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open optima file " + path.string());
    std::vector<OptimumRow> optima;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        if (lineNo == 1 && line.rfind("workloadId,", 0) == 0) continue;
        const auto f = splitCsv(line);
        if (f.size() != 5)
            throw std::runtime_error(path.string() + " line " + std::to_string(lineNo) +
                                     ": expected 5 columns");
        OptimumRow o;
        o.workloadId = f[0];
        o.percentile = std::stod(f[1]);
        o.runtimeTargetS = std::stod(f[2]);
        o.optimalCost = std::stod(f[3]);
        o.optimalEnergy = std::stod(f[4]);
        optima.push_back(std::move(o));
    }
    return optima;
}

std::string summarizeResults(const std::vector<ResultRow>& rows,
                             const std::vector<OptimumRow>& optima) {
    std::map<std::pair<std::string, double>, const OptimumRow*> optByTarget;
    for (const auto& o : optima) optByTarget[{o.workloadId, o.percentile}] = &o;

    // sessions keyed by (workload, percentile, repetition, method)
    struct Session {
        std::map<int, const ResultRow*> byIteration;
        int stoppedAt = 0;
    };
    std::map<std::tuple<std::string, double, int, std::string>, Session> sessions;
    int maxIter = 0;
    for (const auto& r : rows) {
        auto& s = sessions[{r.workloadId, r.percentile, r.repetition, r.method}];
        s.byIteration[r.iteration] = &r;
        s.stoppedAt = r.stoppedAt;
        maxIter = std::max(maxIter, r.iteration);
    }

    std::map<std::string, json> byMethod;
    for (const auto& [key, s] : sessions) {
        const auto& [workload, percentile, rep, method] = key;
        json& m = byMethod[method];
        if (m.is_null()) {
            m["sessions"] = 0;
            m["withinQuarterOfOptimalByIteration"] = json::array();
            m["atOptimumByIteration"] = json::array();
            m["meanCumulativeSearchCost"] = 0.0;
            m["meanCumulativeSearchTimeS"] = 0.0;
            m["meanTimeoutCount"] = 0.0;
            m["meanStoppedAt"] = 0.0;
        }
        m["sessions"] = m["sessions"].get<int>() + 1;
        const OptimumRow* opt = nullptr;
        if (auto it = optByTarget.find({workload, percentile}); it != optByTarget.end())
            opt = it->second;
        auto& within = m["withinQuarterOfOptimalByIteration"];
        auto& atOpt = m["atOptimumByIteration"];
        while (static_cast<int>(within.size()) < maxIter) {
            within.push_back(0);
            atOpt.push_back(0);
        }
        for (int i = 1; i <= maxIter; ++i) {
            const int effective = std::min(i, s.stoppedAt);
            auto it = s.byIteration.find(effective);
            if (it == s.byIteration.end() || !opt) continue;
            const auto& row = *it->second;
            if (row.bestFeasibleCost) {
                if (*row.bestFeasibleCost <= 1.25 * opt->optimalCost)
                    within[i - 1] = within[i - 1].get<int>() + 1;
                if (*row.bestFeasibleCost <= opt->optimalCost * (1.0 + 1e-9))
                    atOpt[i - 1] = atOpt[i - 1].get<int>() + 1;
            }
        }
        const auto& last = *s.byIteration.rbegin()->second;
        m["meanCumulativeSearchCost"] = m["meanCumulativeSearchCost"].get<double>() + last.cumulativeSearchCost;
        m["meanCumulativeSearchTimeS"] =
            m["meanCumulativeSearchTimeS"].get<double>() + last.cumulativeSearchTimeS;
        m["meanTimeoutCount"] = m["meanTimeoutCount"].get<double>() + last.timeoutCount;
        m["meanStoppedAt"] = m["meanStoppedAt"].get<double>() + last.stoppedAt;
    }

    json summary;
    for (auto& [method, m] : byMethod) {
        const double n = m["sessions"].get<int>();
        json fractionsWithin = json::array();
        json fractionsAt = json::array();
        for (const auto& v : m["withinQuarterOfOptimalByIteration"])
            fractionsWithin.push_back(v.get<int>() / n);
        for (const auto& v : m["atOptimumByIteration"]) fractionsAt.push_back(v.get<int>() / n);
        m["withinQuarterOfOptimalByIteration"] = fractionsWithin;
        m["atOptimumByIteration"] = fractionsAt;
        m["meanCumulativeSearchCost"] = m["meanCumulativeSearchCost"].get<double>() / n;
        m["meanCumulativeSearchTimeS"] = m["meanCumulativeSearchTimeS"].get<double>() / n;
        m["meanTimeoutCount"] = m["meanTimeoutCount"].get<double>() / n;
        m["meanStoppedAt"] = m["meanStoppedAt"].get<double>() / n;
        summary[method] = m;
    }
    return summary.dump(2);
}

}  // namespace karasu

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>

#include "karasu/harness.hpp"
#include "karasu/rng.hpp"

using namespace karasu;
namespace fs = std::filesystem;

namespace {

fs::path writeTemp(const std::string& name, const std::string& content) {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream out(p);
    out << content;
    return p;
}

std::string readFile(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ExperimentPlan smallBoostPlan() {
    ExperimentPlan plan;
    plan.scenario = Scenario::boost;
    plan.runtimePercentiles = {0.5};
    plan.repetitions = 2;
    plan.modelCounts = {2};
    plan.budget = {8, 4, 0.10};
    PlannedWorkload w;
    w.name = "wl0";
    w.meta = {"spark", "pagerank", "ds0"};
    w.spec.seed = 5;
    plan.workloads.push_back(w);
    return plan;
}

}  // namespace

TEST_CASE("runtime target percentiles") {
    Rng rng(2);
    std::vector<double> runtimes;
    for (int i = 0; i < 69; ++i) runtimes.push_back(50.0 + 200.0 * rng.uniform01());
    const double maxV = *std::max_element(runtimes.begin(), runtimes.end());
    CHECK(computeRuntimeTarget(runtimes, 1.0) == doctest::Approx(maxV));

    // independent sort-based median oracle (69 values: middle order statistic)
    std::vector<double> sorted = runtimes;
    std::sort(sorted.begin(), sorted.end());
    CHECK(computeRuntimeTarget(runtimes, 0.5) == doctest::Approx(sorted[34]));
    CHECK(computeRuntimeTarget(runtimes, 0.0) == doctest::Approx(sorted.front()));
    CHECK_THROWS(computeRuntimeTarget({}, 0.5));
}

TEST_CASE("case filters partition candidates by metadata relation") {
    const WorkloadMeta target{"spark", "pagerank", "ds0"};
    const std::map<std::string, WorkloadMeta> candidates = {
        {"caseA", {"flink", "kmeans", "ds9"}},     // nothing shared
        {"caseB", {"spark", "kmeans", "ds9"}},     // framework only
        {"caseC", {"spark", "pagerank", "ds9"}},   // framework + algorithm
        {"caseD", {"spark", "pagerank", "ds0"}},   // everything shared
        {"self", target},
    };
    CHECK(applyCaseFilter(candidates, "self", target, CaseFilter::A) ==
          std::vector<std::string>{"caseA"});
    CHECK(applyCaseFilter(candidates, "self", target, CaseFilter::B) ==
          std::vector<std::string>{"caseB"});
    CHECK(applyCaseFilter(candidates, "self", target, CaseFilter::C) ==
          std::vector<std::string>{"caseC"});
    CHECK(applyCaseFilter(candidates, "self", target, CaseFilter::D) ==
          std::vector<std::string>{"caseD"});
    const auto all = applyCaseFilter(candidates, "self", target, CaseFilter::none);
    CHECK(all.size() == 4);  // target itself always excluded

    // the four filters are pairwise disjoint and cover this fixture
    std::set<std::string> seen;
    for (CaseFilter f : {CaseFilter::A, CaseFilter::B, CaseFilter::C, CaseFilter::D})
        for (const auto& id : applyCaseFilter(candidates, "self", target, f))
            CHECK(seen.insert(id).second);
    CHECK(seen.size() == 4);
}

TEST_CASE("heterogeneous truncation keeps seeded run prefixes") {
    Repository store;
    auto addRuns = [&](const std::string& id, int count) {
        for (int i = 0; i < count; ++i) {
            RunRecord r;
            r.workloadId = id;
            r.config = {"m", 2 + 2 * i, {4, 16.0, 0.1, 10.0, 45.0}};
            for (int m = 0; m < kMetricCount; ++m) r.metrics.metrics[m] = {40.0, 50.0, 60.0};
            r.measures = {100.0, 1.0, 50.0};
            r.sequence = i + 1;
            store.add(r);
        }
    };
    addRuns("tiny", 3);
    addRuns("mid", 7);
    addRuns("big", 12);

    const Repository cut = truncateHeterogeneous(store, 99);
    CHECK(cut.runs("tiny").size() == 3);  // n = 3 cannot shrink
    for (const auto& id : {"mid", "big"}) {
        const auto& kept = cut.runs(id);
        CHECK(kept.size() >= 3);
        CHECK(kept.size() <= store.runs(id).size());
        for (std::size_t i = 0; i < kept.size(); ++i)
            CHECK(kept[i].sequence == static_cast<int>(i) + 1);  // prefix by sequence
    }

    const Repository again = truncateHeterogeneous(store, 99);
    CHECK(again.runs("mid").size() == cut.runs("mid").size());
    CHECK(again.runs("big").size() == cut.runs("big").size());

    // different seeds reshuffle the cut points eventually
    bool varied = false;
    for (std::uint64_t s = 1; s < 12 && !varied; ++s)
        varied = truncateHeterogeneous(store, s).runs("big").size() != cut.runs("big").size();
    CHECK(varied);
}

TEST_CASE("plan files parse and validate") {
    const fs::path good = writeTemp("karasu_plan_good.json", R"({
        "scenario": "cases",
        "caseFilter": "B",
        "runtimePercentiles": [0.3, 0.7],
        "repetitions": 3,
        "modelCounts": [2, 4],
        "seeds": [11, 12, 13],
        "budget": {"maxRuns": 9, "minRuns": 5, "eiStopFraction": 0.2},
        "workloads": [
            {"name": "a", "framework": "spark", "algorithm": "kmeans", "dataset": "d1", "seed": 1},
            {"name": "b", "seed": 2, "archetype": 2}
        ]
    })");
    const ExperimentPlan plan = loadPlan(good);
    CHECK(plan.scenario == Scenario::cases);
    CHECK(plan.caseFilter == CaseFilter::B);
    CHECK(plan.runtimePercentiles == std::vector<double>{0.3, 0.7});
    CHECK(plan.repetitions == 3);
    CHECK(plan.modelCounts == std::vector<int>{2, 4});
    CHECK(plan.seeds == std::vector<std::uint64_t>{11, 12, 13});
    CHECK(plan.budget.maxRuns == 9);
    CHECK(plan.workloads.size() == 2);
    CHECK(plan.workloads[1].spec.archetype == 2);

    CHECK_THROWS(loadPlan(writeTemp("karasu_plan_pct.json",
                                    R"({"scenario":"boost","runtimePercentiles":[0.5,0.5],
                                        "workloads":[{"name":"a"}]})")));
    CHECK_THROWS(loadPlan(writeTemp("karasu_plan_empty.json",
                                    R"({"scenario":"boost","workloads":[]})")));
    CHECK_THROWS(loadPlan(writeTemp("karasu_plan_bad.json", "{")));
}

TEST_CASE("experiment bookkeeping: sessions, iterations, and optima") {
    const ExperimentPlan plan = smallBoostPlan();
    const ExperimentOutput out = runExperiment(plan);

    // 1 workload x 1 percentile x 2 repetitions x 2 methods
    std::map<std::tuple<std::string, double, int, std::string>, std::vector<const ResultRow*>> bySession;
    for (const auto& r : out.rows)
        bySession[{r.workloadId, r.percentile, r.repetition, r.method}].push_back(&r);
    CHECK(bySession.size() == 4);

    std::size_t expectedRows = 0;
    for (const auto& [key, rows] : bySession) {
        // iterations run contiguously from 1 to stoppedAt
        for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i]->iteration == static_cast<int>(i) + 1);
        CHECK(static_cast<int>(rows.size()) == rows.back()->stoppedAt);
        CHECK(rows.back()->stoppedAt >= plan.budget.minRuns);
        CHECK(rows.back()->stoppedAt <= plan.budget.maxRuns);
        expectedRows += rows.size();

        // best-feasible cost is non-increasing, cumulative cost increasing
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i - 1]->bestFeasibleCost && rows[i]->bestFeasibleCost)
                CHECK(*rows[i]->bestFeasibleCost <= *rows[i - 1]->bestFeasibleCost + 1e-12);
            CHECK(rows[i]->cumulativeSearchCost > rows[i - 1]->cumulativeSearchCost);
        }
    }
    CHECK(out.rows.size() == expectedRows);

    // optima match an independent exhaustive replay
    REQUIRE(out.optima.size() == 1);
    const SearchSpace space = defaultSyntheticSpace();
    const SyntheticWorkload synth(plan.workloads[0].spec, space);
    std::vector<double> runtimes;
    for (const auto& c : space.configurations()) runtimes.push_back(synth.run(c).measures.runtimeS);
    const double target = computeRuntimeTarget(runtimes, 0.5);
    double bestCost = std::numeric_limits<double>::infinity();
    for (const auto& c : space.configurations()) {
        const RunRecord r = synth.run(c);
        if (r.measures.runtimeS <= target) bestCost = std::min(bestCost, r.measures.costUsd);
    }
    CHECK(out.optima[0].runtimeTargetS == doctest::Approx(target));
    CHECK(out.optima[0].optimalCost == doctest::Approx(bestCost));

    // every session's final best feasible cost can never beat the optimum
    for (const auto& [key, rows] : bySession)
        if (rows.back()->bestFeasibleCost)
            CHECK(*rows.back()->bestFeasibleCost >= bestCost - 1e-12);
}

TEST_CASE("identical plans produce byte-identical output files") {
    const ExperimentPlan plan = smallBoostPlan();
    const ExperimentOutput a = runExperiment(plan);
    const ExperimentOutput b = runExperiment(plan);
    const fs::path fa = fs::temp_directory_path() / "karasu_results_a.csv";
    const fs::path fb = fs::temp_directory_path() / "karasu_results_b.csv";
    writeResultsCsv(fa, a.rows);
    writeResultsCsv(fb, b.rows);
    CHECK(readFile(fa) == readFile(fb));
    const fs::path oa = fs::temp_directory_path() / "karasu_optima_a.csv";
    const fs::path ob = fs::temp_directory_path() / "karasu_optima_b.csv";
    writeOptimaCsv(oa, a.optima);
    writeOptimaCsv(ob, b.optima);
    CHECK(readFile(oa) == readFile(ob));
}

TEST_CASE("result and optima files round-trip and summarize") {
    const ExperimentPlan plan = smallBoostPlan();
    const ExperimentOutput out = runExperiment(plan);
    const fs::path rf = fs::temp_directory_path() / "karasu_results_rt.csv";
    const fs::path of = fs::temp_directory_path() / "karasu_optima_rt.csv";
    writeResultsCsv(rf, out.rows);
    writeOptimaCsv(of, out.optima);

    const std::vector<ResultRow> rows = readResultsCsv(rf);
    REQUIRE(rows.size() == out.rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].workloadId == out.rows[i].workloadId);
        CHECK(rows[i].iteration == out.rows[i].iteration);
        CHECK(rows[i].method == out.rows[i].method);
        CHECK(rows[i].bestFeasibleCost.has_value() == out.rows[i].bestFeasibleCost.has_value());
        if (rows[i].bestFeasibleCost)
            CHECK(*rows[i].bestFeasibleCost == doctest::Approx(*out.rows[i].bestFeasibleCost));
        CHECK(rows[i].stopReason == out.rows[i].stopReason);
    }
    const std::vector<OptimumRow> optima = readOptimaCsv(of);
    REQUIRE(optima.size() == 1);
    CHECK(optima[0].optimalCost == doctest::Approx(out.optima[0].optimalCost));

    // the summary is recomputable from the files alone
    const std::string summaryText = summarizeResults(rows, optima);
    const nlohmann::json summary = nlohmann::json::parse(summaryText);
    REQUIRE(summary.contains("baseline"));
    REQUIRE(summary.contains("karasu_m2"));
    for (const auto& method : {"baseline", "karasu_m2"}) {
        const nlohmann::json& m = summary.at(method);
        CHECK(m.at("sessions").get<int>() == 2);
        for (const auto& v : m.at("withinQuarterOfOptimalByIteration")) {
            CHECK(v.get<double>() >= 0.0);
            CHECK(v.get<double>() <= 1.0);
        }
        CHECK(m.at("meanStoppedAt").get<double>() >= plan.budget.minRuns);
        CHECK(m.at("meanCumulativeSearchCost").get<double>() > 0.0);
    }
    // carried-forward flags never decrease once a session is within range
    for (const auto& method : {"baseline", "karasu_m2"}) {
        const auto at = summary.at(method).at("atOptimumByIteration");
        for (std::size_t i = 1; i < at.size(); ++i)
            CHECK(at[i].get<double>() >= at[i - 1].get<double>() - 1e-12);
    }
}

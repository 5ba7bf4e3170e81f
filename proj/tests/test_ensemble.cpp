#include <doctest.h>

#include "karasu/ensemble.hpp"
#include "karasu/rng.hpp"
#include "oracles.hpp"

using namespace karasu;

namespace {

EncodedConfig vec1(double a) {
    EncodedConfig x(1);
    x[0] = a;
    return x;
}

ObservationSet lineData(int n, double slope, std::uint64_t seed) {
    Rng rng(seed);
    ObservationSet data;
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) / n;
        data.add(vec1(x), slope * x + 0.01 * rng.gaussian());
    }
    return data;
}

}  // namespace

TEST_CASE("ranking loss on hand cases") {
    CHECK(rankingLoss({2.0, 1.0}, {1.0, 2.0}) == 2);  // both off-diagonal pairs misranked
    CHECK(rankingLoss({1.0, 2.0, 3.0}, {10.0, 20.0, 30.0}) == 0);
    CHECK(rankingLoss({5.0}, {1.0}) == 0);
}

TEST_CASE("ranking loss equals the brute-force oracle on random instances") {
    Rng rng(3);
    for (int rep = 0; rep < 200; ++rep) {
        const int n = 2 + static_cast<int>(rng.below(5));
        std::vector<double> pred(n), y(n);
        for (int i = 0; i < n; ++i) {
            pred[i] = rng.gaussian();
            y[i] = rng.gaussian();
        }
        CHECK(rankingLoss(pred, y) == oracles::rankingLossRef(pred, y));
    }
}

TEST_CASE("ranking loss is invariant under strictly increasing transforms") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
        const int n = 6;
        std::vector<double> pred(n), y(n), warped(n);
        for (int i = 0; i < n; ++i) {
            pred[i] = rng.gaussian();
            y[i] = rng.gaussian();
            warped[i] = std::exp(3.0 * pred[i]) + 7.0;
        }
        CHECK(rankingLoss(pred, y) == rankingLoss(warped, y));
    }
}

TEST_CASE("no supports gives weight one to the target") {
    const ObservationSet data = lineData(4, 1.0, 1);
    const SurrogateModel target = SurrogateModel::fit(data, 0.1);
    const auto w = computeWeights(target, {}, data, 64, 9);
    REQUIRE(w.size() == 1);
    CHECK(w[0] == doctest::Approx(1.0));
}

TEST_CASE("strictly dominated support gets zero weight") {
    // target observations are increasing; the support was trained on the
    // reversed trend and misranks every pair, while the target's LOO
    // predictions recover the trend.
    const ObservationSet targetData = lineData(6, 10.0, 2);
    const SurrogateModel target = SurrogateModel::fit(targetData, 0.001);
    auto support =
        std::make_shared<SurrogateModel>(SurrogateModel::fit(lineData(8, -10.0, 3), 0.001));
    const auto w = computeWeights(target, {support}, targetData, 256, 5);
    REQUIRE(w.size() == 2);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == doctest::Approx(0.0));
}

TEST_CASE("two identical supports split the weight evenly") {
    // supports model the target's trend perfectly; the target has too little
    // signal of its own (noisy LOO), so the supports win nearly every sample
    const ObservationSet targetData = lineData(5, 2.0, 6);
    const SurrogateModel target = SurrogateModel::fit(lineData(5, 0.0, 7), 0.1);  // flat, uninformed
    auto supportA =
        std::make_shared<SurrogateModel>(SurrogateModel::fit(lineData(12, 2.0, 8), 0.001));
    auto supportB = std::make_shared<SurrogateModel>(*supportA);
    const auto w = computeWeights(target, {supportA, supportB}, targetData, 10000, 11);
    REQUIRE(w.size() == 3);
    CHECK(w[1] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(w[2] == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(w[1] - 0.5) < 0.05);
    CHECK(std::abs(w[2] - 0.5) < 0.05);
}

TEST_CASE("weights are a probability distribution") {
    Rng rng(13);
    for (int rep = 0; rep < 5; ++rep) {
        const ObservationSet targetData = lineData(4 + rep, 1.0, 20 + rep);
        const SurrogateModel target = SurrogateModel::fit(targetData, 0.1);
        std::vector<std::shared_ptr<const SurrogateModel>> supports;
        for (int s = 0; s < 3; ++s)
            supports.push_back(std::make_shared<SurrogateModel>(
                SurrogateModel::fit(lineData(5, rng.gaussian() * 5.0, 30 + 7 * rep + s), 0.1)));
        const auto w = computeWeights(target, supports, targetData, 128, 40 + rep);
        double sum = 0.0;
        for (double wi : w) {
            CHECK(wi >= 0.0);
            sum += wi;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("ensemble posterior matches the direct weighted sums") {
    Rng rng(21);
    std::vector<std::shared_ptr<const SurrogateModel>> members;
    for (int i = 0; i < 3; ++i)
        members.push_back(std::make_shared<SurrogateModel>(
            SurrogateModel::fit(lineData(5, 1.0 + i, 50 + i), 0.1)));
    const std::vector<double> weights = {0.5, 0.3, 0.2};
    const EnsembleModel ens({members[0], members[1], members[2]}, weights);
    for (int probe = 0; probe < 10; ++probe) {
        const EncodedConfig x = vec1(rng.uniform01());
        double mean = 0.0, var = 0.0;
        for (int i = 0; i < 3; ++i) {
            const GaussianPrediction p = members[static_cast<std::size_t>(i)]->posteriorStandardized(x);
            mean += weights[static_cast<std::size_t>(i)] * p.mean;
            var += weights[static_cast<std::size_t>(i)] * weights[static_cast<std::size_t>(i)] * p.variance;
        }
        const GaussianPrediction got = ens.posteriorStandardized(x);
        CHECK(std::abs(got.mean - mean) < 1e-12);
        CHECK(std::abs(got.variance - var) < 1e-12);
    }
}

TEST_CASE("single-member ensemble reproduces that member") {
    const auto member =
        std::make_shared<SurrogateModel>(SurrogateModel::fit(lineData(6, 3.0, 60), 0.1));
    const EnsembleModel ens({member}, {1.0});
    for (double xv : {0.1, 0.4, 0.9}) {
        const EncodedConfig x = vec1(xv);
        CHECK(ens.posterior(x).mean == doctest::Approx(member->posterior(x).mean).epsilon(1e-12));
        CHECK(ens.posterior(x).variance ==
              doctest::Approx(member->posterior(x).variance).epsilon(1e-12));
    }
}

TEST_CASE("degenerate weight vector (1,0) ignores the second member") {
    const auto a = std::make_shared<SurrogateModel>(SurrogateModel::fit(lineData(5, 1.0, 70), 0.1));
    const auto b = std::make_shared<SurrogateModel>(SurrogateModel::fit(lineData(5, -4.0, 71), 0.1));
    const EnsembleModel ens({a, b}, {1.0, 0.0});
    const EncodedConfig x = vec1(0.37);
    CHECK(ens.posterior(x).mean == doctest::Approx(a->posterior(x).mean).epsilon(1e-12));
}

TEST_CASE("ensemble rejects invalid weights") {
    const auto m = std::make_shared<SurrogateModel>(SurrogateModel::fit(lineData(4, 1.0, 80), 0.1));
    CHECK_THROWS(EnsembleModel({m}, {0.5}));
    CHECK_THROWS(EnsembleModel({m, m}, {1.5, -0.5}));
    CHECK_THROWS(EnsembleModel({m}, {1.0, 0.0}));
}

#include "karasu/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "karasu/rng.hpp"

namespace karasu {

int rankingLoss(const std::vector<double>& predictions, const std::vector<double>& targets) {
    if (predictions.size() != targets.size())
        throw std::invalid_argument("rankingLoss: size mismatch");
    const std::size_t n = predictions.size();
    int loss = 0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
            if ((predictions[a] < predictions[b]) != (targets[a] < targets[b])) ++loss;
    return loss;
}

namespace {

// type-7 percentile of a sorted copy
double percentile(std::vector<double> v, double p) {
    std::sort(v.begin(), v.end());
    const double h = p * (static_cast<double>(v.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

std::vector<double> computeWeights(const SurrogateModel& target,
                                   const std::vector<std::shared_ptr<const SurrogateModel>>& supports,
                                   const ObservationSet& targetData, int sampleCount,
                                   std::uint64_t seed) {
    if (sampleCount < 1) throw std::invalid_argument("sampleCount must be >= 1");
    if (targetData.size() < 1) throw std::invalid_argument("targetData must be non-empty");
    const std::size_t memberCount = supports.size() + 1;
    if (supports.empty()) return {1.0};

    const std::size_t n = targetData.size();
    const std::vector<double>& y = targetData.targets;

    // target: independent draws from leave-one-out posteriors
    const std::vector<GaussianPrediction> loo = target.looPredictionsStandardized();
    Rng targetRng(Rng::deriveSeed(seed, 0));
    std::vector<std::vector<int>> losses(sampleCount, std::vector<int>(memberCount, 0));
    std::vector<double> preds(n);
    for (int s = 0; s < sampleCount; ++s) {
        for (std::size_t j = 0; j < n; ++j)
            preds[j] = loo[j].mean + std::sqrt(std::max(0.0, loo[j].variance)) * targetRng.gaussian();
        losses[s][0] = rankingLoss(preds, y);
    }

    // supports: joint posterior draws at the target's observed points
    for (std::size_t i = 0; i < supports.size(); ++i) {
        const Eigen::MatrixXd draws =
            supports[i]->samplePosteriorStandardized(targetData.points, sampleCount, Rng::deriveSeed(seed, i + 1));
        for (int s = 0; s < sampleCount; ++s) {
            for (std::size_t j = 0; j < n; ++j) preds[j] = draws(s, static_cast<Eigen::Index>(j));
            losses[s][i + 1] = rankingLoss(preds, y);
        }
    }

    std::vector<double> targetLosses(sampleCount);
    for (int s = 0; s < sampleCount; ++s) targetLosses[s] = losses[s][0];
    const double dilutionCutoff = percentile(targetLosses, 0.95);

    std::vector<double> weights(memberCount, 0.0);
    for (int s = 0; s < sampleCount; ++s) {
        int minLoss = losses[s][0];
        for (std::size_t i = 1; i < memberCount; ++i)
            if (losses[s][i] <= dilutionCutoff) minLoss = std::min(minLoss, losses[s][i]);
        std::vector<std::size_t> argmin;
        if (losses[s][0] == minLoss) argmin.push_back(0);
        for (std::size_t i = 1; i < memberCount; ++i)
            if (losses[s][i] <= dilutionCutoff && losses[s][i] == minLoss) argmin.push_back(i);
        const double credit = 1.0 / static_cast<double>(argmin.size());
        for (std::size_t i : argmin) weights[i] += credit;
    }
    for (double& w : weights) w /= static_cast<double>(sampleCount);
    return weights;
}

EnsembleModel::EnsembleModel(std::vector<std::shared_ptr<const SurrogateModel>> members,
                             std::vector<double> weights)
    : members_(std::move(members)), weights_(std::move(weights)) {
    if (members_.empty() || members_.size() != weights_.size())
        throw std::invalid_argument("ensemble members/weights size mismatch");
    double sum = 0.0;
    for (double w : weights_) {
        if (w < 0.0) throw std::invalid_argument("ensemble weights must be nonnegative");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("ensemble weights must sum to 1");
}

GaussianPrediction EnsembleModel::posteriorStandardized(const EncodedConfig& x) const {
    GaussianPrediction out{0.0, 0.0};
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (weights_[i] == 0.0) continue;
        const GaussianPrediction p = members_[i]->posteriorStandardized(x);
        out.mean += weights_[i] * p.mean;
        out.variance += weights_[i] * weights_[i] * p.variance;
    }
    return out;
}

GaussianPrediction EnsembleModel::posterior(const EncodedConfig& x) const {
    GaussianPrediction p = posteriorStandardized(x);
    const TargetStandardization std = members_.front()->targetStandardization();
    p.mean = p.mean * std.stddev + std.mean;
    p.variance *= std.stddev * std.stddev;
    return p;
}

double EnsembleModel::maxSupportWeight() const {
    double m = 0.0;
    for (std::size_t i = 1; i < weights_.size(); ++i) m = std::max(m, weights_[i]);
    return m;
}

}  // namespace karasu

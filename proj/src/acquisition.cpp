#include "karasu/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "karasu/rng.hpp"

namespace karasu {

double normalPdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

double normalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double expectedImprovement(const PosteriorModel& model, const EncodedConfig& x, double best) {
    const GaussianPrediction p = model.posterior(x);
    const double sigma = std::sqrt(std::max(0.0, p.variance));
    if (sigma < 1e-12) return std::max(best - p.mean, 0.0);
    const double z = (best - p.mean) / sigma;
    return std::max(0.0, (best - p.mean) * normalCdf(z) + sigma * normalPdf(z));
}

double probabilityOfFeasibility(const PosteriorModel& model, const EncodedConfig& x, double bound) {
    const GaussianPrediction p = model.posterior(x);
    const double sigma = std::sqrt(std::max(0.0, p.variance));
    if (sigma < 1e-12) return p.mean <= bound ? 1.0 : 0.0;
    return normalCdf((bound - p.mean) / sigma);
}

double constrainedScore(const AcquisitionContext& ctx, const EncodedConfig& x) {
    if (ctx.objectiveModels.size() != 1)
        throw std::invalid_argument("constrainedScore expects a single-objective context");
    if (ctx.constraintModels.size() != ctx.constraintBounds.size())
        throw std::invalid_argument("constraint models/bounds size mismatch");
    double pof = 1.0;
    for (std::size_t i = 0; i < ctx.constraintModels.size(); ++i)
        pof *= probabilityOfFeasibility(*ctx.constraintModels[i], x, ctx.constraintBounds[i]);
    if (ctx.bestFeasible.empty() || !ctx.bestFeasible.front().has_value()) return pof;
    return expectedImprovement(*ctx.objectiveModels.front(), x, *ctx.bestFeasible.front()) * pof;
}

double hypervolume2d(const std::vector<std::array<double, 2>>& points,
                     const std::array<double, 2>& ref) {
    // keep only points strictly dominating the reference
    std::vector<std::array<double, 2>> pts;
    for (const auto& p : points)
        if (p[0] < ref[0] && p[1] < ref[1]) pts.push_back(p);
    if (pts.empty()) return 0.0;
    // sweep by first coordinate ascending; second coordinate of the running
    // non-dominated staircase decreases
    std::sort(pts.begin(), pts.end());
    double area = 0.0;
    double bestY = ref[1];
    for (const auto& p : pts) {
        if (p[1] < bestY) {
            area += (ref[0] - p[0]) * (bestY - p[1]);
            bestY = p[1];
        }
    }
    return area;
}

double mcEhvi(const AcquisitionContext& ctx, const EncodedConfig& x,
              const std::vector<std::array<double, 2>>& front, int sampleCount, std::uint64_t seed) {
    if (sampleCount < 1) throw std::invalid_argument("sampleCount must be >= 1");
    if (ctx.objectiveModels.size() != 2)
        throw std::invalid_argument("mcEhvi expects exactly two objectives");
    if (ctx.referencePoint.size() != 2)
        throw std::invalid_argument("mcEhvi requires a 2d reference point");
    const std::array<double, 2> ref{ctx.referencePoint[0], ctx.referencePoint[1]};
    const double baseHv = hypervolume2d(front, ref);

    std::array<GaussianPrediction, 2> obj;
    for (int k = 0; k < 2; ++k) obj[k] = ctx.objectiveModels[k]->posterior(x);
    std::vector<GaussianPrediction> cons(ctx.constraintModels.size());
    for (std::size_t i = 0; i < cons.size(); ++i) cons[i] = ctx.constraintModels[i]->posterior(x);

    Rng rng(seed);
    std::vector<std::array<double, 2>> augmented = front;
    augmented.push_back({0.0, 0.0});
    double total = 0.0;
    for (int s = 0; s < sampleCount; ++s) {
        bool feasible = true;
        for (std::size_t i = 0; i < cons.size(); ++i) {
            const double v = cons[i].mean + std::sqrt(std::max(0.0, cons[i].variance)) * rng.gaussian();
            if (v > ctx.constraintBounds[i]) feasible = false;
        }
        std::array<double, 2> sample;
        for (int k = 0; k < 2; ++k)
            sample[k] = obj[k].mean + std::sqrt(std::max(0.0, obj[k].variance)) * rng.gaussian();
        if (!feasible) continue;
        augmented.back() = sample;
        total += std::max(0.0, hypervolume2d(augmented, ref) - baseHv);
    }
    return total / static_cast<double>(sampleCount);
}

}  // namespace karasu

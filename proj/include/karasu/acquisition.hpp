#ifndef KARASU_ACQUISITION_HPP
#define KARASU_ACQUISITION_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "karasu/gp.hpp"

namespace karasu {

/// Standard normal pdf / cdf.
double normalPdf(double z);
double normalCdf(double z);

/// Models and constraint bounds needed to score a candidate. Minimization
/// convention throughout.
struct AcquisitionContext {
    std::vector<std::shared_ptr<const PosteriorModel>> objectiveModels;
    std::vector<std::shared_ptr<const PosteriorModel>> constraintModels;
    std::vector<double> constraintBounds;  // measure <= bound
    std::vector<std::optional<double>> bestFeasible;  // per objective, absent before any feasible run
    std::vector<double> referencePoint;  // MOO only
};

/// Closed-form expected improvement for minimization.
double expectedImprovement(const PosteriorModel& model, const EncodedConfig& x, double best);

/// Posterior mass below the bound.
double probabilityOfFeasibility(const PosteriorModel& model, const EncodedConfig& x, double bound);

/// EI weighted by the product of constraint feasibility probabilities; before
/// any feasible observation exists the score is the feasibility product alone.
double constrainedScore(const AcquisitionContext& ctx, const EncodedConfig& x);

/// Area dominated by the non-dominated subset of points w.r.t. ref
/// (minimization in both coordinates).
double hypervolume2d(const std::vector<std::array<double, 2>>& points,
                     const std::array<double, 2>& ref);

/// Monte-Carlo expected hypervolume improvement over the current feasible
/// front, each sample weighted by sampled feasibility of all constraints.
/// Exactly two objectives. Deterministic given seed.
double mcEhvi(const AcquisitionContext& ctx, const EncodedConfig& x,
              const std::vector<std::array<double, 2>>& front, int sampleCount, std::uint64_t seed);

}  // namespace karasu

#endif

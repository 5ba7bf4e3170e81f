#ifndef KARASU_ENSEMBLE_HPP
#define KARASU_ENSEMBLE_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include "karasu/gp.hpp"

namespace karasu {

/// Number of misranked ordered pairs between predictions and observed targets
/// (XOR of the two strict orderings, summed over all ordered pairs).
int rankingLoss(const std::vector<double>& predictions, const std::vector<double>& targets);

/// Ranking-based ensemble weights for (target, supports...), front element is
/// the target model. Ties in the per-sample argmin split evenly; weight
/// dilution is prevented by discarding, per sample, supports whose sampled
/// loss exceeds the 95th percentile of the target's sampled losses. The
/// target's loss samples come from leave-one-out posteriors.
std::vector<double> computeWeights(const SurrogateModel& target,
                                   const std::vector<std::shared_ptr<const SurrogateModel>>& supports,
                                   const ObservationSet& targetData, int sampleCount,
                                   std::uint64_t seed);

/// Weighted combination of GP posteriors: mean = sum a_i mu_i,
/// variance = sum a_i^2 sigma_i^2, combined in the members' standardized
/// scales. members[0] is the target model and defines the original-unit scale
/// the combined prediction is mapped back to.
class EnsembleModel : public PosteriorModel {
   public:
    EnsembleModel(std::vector<std::shared_ptr<const SurrogateModel>> members,
                  std::vector<double> weights);

    GaussianPrediction posterior(const EncodedConfig& x) const override;
    GaussianPrediction posteriorStandardized(const EncodedConfig& x) const override;

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::shared_ptr<const SurrogateModel>>& members() const { return members_; }

    /// Largest weight held by any non-target member (0 if none).
    double maxSupportWeight() const;

   private:
    std::vector<std::shared_ptr<const SurrogateModel>> members_;
    std::vector<double> weights_;
};

}  // namespace karasu

#endif

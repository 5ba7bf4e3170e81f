#ifndef KARASU_GP_HPP
#define KARASU_GP_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "karasu/search_space.hpp"
#include "karasu/types.hpp"

namespace karasu {

/// Training data for one measure: encoded configurations and one target each.
struct ObservationSet {
    std::vector<EncodedConfig> points;
    std::vector<double> targets;
    MeasureKind measureKind = MeasureKind::custom;

    std::size_t size() const { return points.size(); }
    void add(EncodedConfig x, double y) {
        points.push_back(std::move(x));
        targets.push_back(y);
    }
};

struct KernelParams {
    double signalVariance = 1.0;
    Eigen::VectorXd lengthscales;  // one per input dimension (ARD)
};

/// Matern 5/2 covariance with per-dimension lengthscales.
double matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& kp);

struct GaussianPrediction {
    double mean = 0.0;
    double variance = 0.0;
};

struct TargetStandardization {
    double mean = 0.0;
    double stddev = 1.0;
};

/// Common interface for anything exposing a Gaussian predictive distribution,
/// both in original target units and in the model's standardized scale.
class PosteriorModel {
   public:
    virtual ~PosteriorModel() = default;
    virtual GaussianPrediction posterior(const EncodedConfig& x) const = 0;
    virtual GaussianPrediction posteriorStandardized(const EncodedConfig& x) const = 0;
};

/// A fitted Gaussian process. Immutable after fit; safe to evaluate from
/// multiple threads.
class SurrogateModel : public PosteriorModel {
   public:
    /// Fits targets (standardized internally) with kernel hyperparameters
    /// chosen by log-marginal-likelihood over a log-spaced grid start plus
    /// coordinate-wise local refinement. noiseVariance is fixed, in
    /// standardized units, and not optimized.
    static SurrogateModel fit(const ObservationSet& data, double noiseVariance = 0.1);

    /// Fit with fixed, caller-supplied kernel hyperparameters.
    static SurrogateModel fitWithParams(const ObservationSet& data, double noiseVariance,
                                        const KernelParams& params);

    GaussianPrediction posterior(const EncodedConfig& x) const override;
    GaussianPrediction posteriorStandardized(const EncodedConfig& x) const override;

    /// Joint draws from the multivariate posterior at xs, in original target
    /// units; one row per draw. Deterministic given seed.
    Eigen::MatrixXd samplePosterior(const std::vector<EncodedConfig>& xs, int count,
                                    std::uint64_t seed) const;
    Eigen::MatrixXd samplePosteriorStandardized(const std::vector<EncodedConfig>& xs, int count,
                                                std::uint64_t seed) const;

    /// Leave-one-out predictive mean/variance at every training point, in
    /// standardized units (refits on D minus one point with the same
    /// hyperparameters).
    std::vector<GaussianPrediction> looPredictionsStandardized() const;

    const ObservationSet& trainingData() const { return data_; }
    const KernelParams& kernelParams() const { return params_; }
    double noiseVariance() const { return noiseVariance_; }
    TargetStandardization targetStandardization() const { return std_; }

    /// Log marginal likelihood of standardized targets under given params;
    /// exposed for tests.
    static double logMarginalLikelihood(const std::vector<EncodedConfig>& points,
                                        const Eigen::VectorXd& yStd, double noiseVariance,
                                        const KernelParams& params);

   private:
    SurrogateModel() = default;
    void factorize();
    Eigen::MatrixXd posteriorJointStandardized(const std::vector<EncodedConfig>& xs,
                                               Eigen::VectorXd& meanOut) const;

    ObservationSet data_;
    KernelParams params_;
    double noiseVariance_ = 0.1;
    TargetStandardization std_;
    Eigen::VectorXd yStd_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    Eigen::VectorXd alpha_;
};

/// Cholesky with escalating diagonal jitter (1e-8 up to 1e-4); throws if the
/// matrix stays non-PSD.
Eigen::LLT<Eigen::MatrixXd> choleskyWithJitter(Eigen::MatrixXd m);

}  // namespace karasu

#endif

#include "karasu/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "karasu/rng.hpp"

namespace karasu {

double matern52(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& kp) {
    if (a.size() != b.size() || a.size() != kp.lengthscales.size())
        throw std::invalid_argument("matern52: dimension mismatch");
    double r2 = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double d = (a[i] - b[i]) / kp.lengthscales[i];
        r2 += d * d;
    }
    const double z = std::sqrt(5.0 * r2);
    return kp.signalVariance * (1.0 + z + z * z / 3.0) * std::exp(-z);
}

namespace {

Eigen::MatrixXd kernelMatrix(const std::vector<EncodedConfig>& xs, const KernelParams& kp) {
    const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = matern52(xs[i], xs[j], kp);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

}  // namespace

Eigen::LLT<Eigen::MatrixXd> choleskyWithJitter(Eigen::MatrixXd m) {
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    double jitter = 1e-8;
    while (llt.info() != Eigen::Success && jitter <= 1e-4) {
        Eigen::MatrixXd jittered = m;
        jittered.diagonal().array() += jitter;
        llt.compute(jittered);
        jitter *= 10.0;
    }
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("kernel matrix not positive definite even with jitter 1e-4");
    return llt;
}

double SurrogateModel::logMarginalLikelihood(const std::vector<EncodedConfig>& points,
                                             const Eigen::VectorXd& yStd, double noiseVariance,
                                             const KernelParams& params) {
    const Eigen::Index n = yStd.size();
    Eigen::MatrixXd k = kernelMatrix(points, params);
    k.diagonal().array() += noiseVariance;
    Eigen::LLT<Eigen::MatrixXd> llt;
    try {
        llt = choleskyWithJitter(std::move(k));
    } catch (const std::runtime_error&) {
        return -std::numeric_limits<double>::infinity();
    }
    const Eigen::VectorXd alpha = llt.solve(yStd);
    double logDet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) logDet += std::log(llt.matrixL()(i, i));
    return -0.5 * yStd.dot(alpha) - logDet - 0.5 * n * std::log(2.0 * M_PI);
}

SurrogateModel SurrogateModel::fitWithParams(const ObservationSet& data, double noiseVariance,
                                             const KernelParams& params) {
    if (data.size() < 1) throw std::invalid_argument("fit requires at least one observation");
    if (data.points.size() != data.targets.size())
        throw std::invalid_argument("points/targets size mismatch");
    if (noiseVariance < 0.0) throw std::invalid_argument("noiseVariance must be >= 0");
    for (double y : data.targets)
        if (!std::isfinite(y)) throw std::invalid_argument("non-finite target");

    SurrogateModel m;
    m.data_ = data;
    m.params_ = params;
    m.noiseVariance_ = noiseVariance;

    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    Eigen::Map<const Eigen::VectorXd> y(data.targets.data(), n);
    m.std_.mean = y.mean();
    const double var = (y.array() - m.std_.mean).square().sum() / static_cast<double>(n);
    // zero-spread targets: fall back to the magnitude of the data so that
    // predictions mapped through this standardization keep a sensible scale
    m.std_.stddev = var > 1e-24 ? std::sqrt(var) : std::max(1.0, std::abs(m.std_.mean));
    m.yStd_ = (y.array() - m.std_.mean) / m.std_.stddev;
    m.factorize();
    return m;
}

void SurrogateModel::factorize() {
    Eigen::MatrixXd k = kernelMatrix(data_.points, params_);
    k.diagonal().array() += noiseVariance_;
    llt_ = choleskyWithJitter(std::move(k));
    alpha_ = llt_.solve(yStd_);
}

SurrogateModel SurrogateModel::fit(const ObservationSet& data, double noiseVariance) {
    if (data.size() < 1) throw std::invalid_argument("fit requires at least one observation");
    const Eigen::Index d = data.points.front().size();

    // standardize once so the LML search sees the same targets as the final fit
    const Eigen::Index n = static_cast<Eigen::Index>(data.size());
    Eigen::Map<const Eigen::VectorXd> y(data.targets.data(), n);
    const double mean = y.mean();
    const double var = (y.array() - mean).square().sum() / static_cast<double>(n);
    const double stddev = var > 1e-24 ? std::sqrt(var) : std::max(1.0, std::abs(mean));
    const Eigen::VectorXd yStd = (y.array() - mean) / stddev;

    const double lsGrid[] = {0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
    const double svGrid[] = {0.25, 1.0, 4.0};

    KernelParams best;
    best.lengthscales = Eigen::VectorXd::Ones(d);
    double bestLml = -std::numeric_limits<double>::infinity();
    for (double ls : lsGrid) {
        for (double sv : svGrid) {
            KernelParams kp;
            kp.signalVariance = sv;
            kp.lengthscales = Eigen::VectorXd::Constant(d, ls);
            const double lml = logMarginalLikelihood(data.points, yStd, noiseVariance, kp);
            if (lml > bestLml) {
                bestLml = lml;
                best = kp;
            }
        }
    }

    // coordinate-wise multiplicative refinement with a shrinking step
    const double lsLo = 0.01, lsHi = 10.0, svLo = 0.01, svHi = 100.0;
    double step = std::sqrt(2.0);
    for (int pass = 0; pass < 3; ++pass) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (Eigen::Index i = 0; i <= d; ++i) {
                for (double factor : {step, 1.0 / step}) {
                    KernelParams trial = best;
                    if (i < d) {
                        trial.lengthscales[i] = std::clamp(best.lengthscales[i] * factor, lsLo, lsHi);
                    } else {
                        trial.signalVariance = std::clamp(best.signalVariance * factor, svLo, svHi);
                    }
                    const double lml = logMarginalLikelihood(data.points, yStd, noiseVariance, trial);
                    if (lml > bestLml + 1e-12) {
                        bestLml = lml;
                        best = trial;
                        improved = true;
                    }
                }
            }
        }
        step = std::sqrt(step);
    }

    return fitWithParams(data, noiseVariance, best);
}

GaussianPrediction SurrogateModel::posteriorStandardized(const EncodedConfig& x) const {
    const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
    Eigen::VectorXd kStar(n);
    for (Eigen::Index i = 0; i < n; ++i) kStar[i] = matern52(data_.points[i], x, params_);
    GaussianPrediction p;
    p.mean = kStar.dot(alpha_);
    const Eigen::VectorXd v = llt_.solve(kStar);
    p.variance = std::max(0.0, params_.signalVariance - kStar.dot(v));
    return p;
}

GaussianPrediction SurrogateModel::posterior(const EncodedConfig& x) const {
    GaussianPrediction p = posteriorStandardized(x);
    p.mean = p.mean * std_.stddev + std_.mean;
    p.variance *= std_.stddev * std_.stddev;
    return p;
}

Eigen::MatrixXd SurrogateModel::posteriorJointStandardized(const std::vector<EncodedConfig>& xs,
                                                           Eigen::VectorXd& meanOut) const {
    const Eigen::Index n = static_cast<Eigen::Index>(data_.size());
    const Eigen::Index q = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd kStar(n, q);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < q; ++j) kStar(i, j) = matern52(data_.points[i], xs[j], params_);
    meanOut = kStar.transpose() * alpha_;
    Eigen::MatrixXd cov(q, q);
    for (Eigen::Index i = 0; i < q; ++i)
        for (Eigen::Index j = i; j < q; ++j) {
            const double v = matern52(xs[i], xs[j], params_);
            cov(i, j) = v;
            cov(j, i) = v;
        }
    cov -= kStar.transpose() * llt_.solve(kStar);
    cov = 0.5 * (cov + cov.transpose());
    return cov;
}

Eigen::MatrixXd SurrogateModel::samplePosteriorStandardized(const std::vector<EncodedConfig>& xs,
                                                            int count, std::uint64_t seed) const {
    if (count < 1) throw std::invalid_argument("sample count must be >= 1");
    if (xs.empty()) return Eigen::MatrixXd(count, 0);
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov = posteriorJointStandardized(xs, mean);
    const Eigen::LLT<Eigen::MatrixXd> llt = choleskyWithJitter(std::move(cov));
    const Eigen::MatrixXd l = llt.matrixL();

    const Eigen::Index q = mean.size();
    Rng rng(seed);
    Eigen::MatrixXd draws(count, q);
    Eigen::VectorXd z(q);
    for (int s = 0; s < count; ++s) {
        for (Eigen::Index j = 0; j < q; ++j) z[j] = rng.gaussian();
        draws.row(s) = (mean + l * z).transpose();
    }
    return draws;
}

Eigen::MatrixXd SurrogateModel::samplePosterior(const std::vector<EncodedConfig>& xs, int count,
                                                std::uint64_t seed) const {
    Eigen::MatrixXd draws = samplePosteriorStandardized(xs, count, seed);
    return (draws.array() * std_.stddev + std_.mean).matrix();
}

std::vector<GaussianPrediction> SurrogateModel::looPredictionsStandardized() const {
    const std::size_t n = data_.size();
    std::vector<GaussianPrediction> out(n);
    if (n < 2) {
        // no held-out fit possible; fall back to the prior
        for (auto& p : out) p = {0.0, params_.signalVariance};
        return out;
    }
    for (std::size_t j = 0; j < n; ++j) {
        ObservationSet rest;
        rest.measureKind = data_.measureKind;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            // keep the already-standardized targets so all folds share a scale
            rest.add(data_.points[i], yStd_[static_cast<Eigen::Index>(i)]);
        }
        SurrogateModel fold = fitWithParams(rest, noiseVariance_, params_);
        // rest targets have ~zero mean already; undo the fold's own re-standardization
        GaussianPrediction p = fold.posterior(data_.points[j]);
        out[j] = p;
    }
    return out;
}

}  // namespace karasu

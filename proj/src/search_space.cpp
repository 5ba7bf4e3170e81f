#include "karasu/search_space.hpp"

#include <set>
#include <string>

namespace karasu {

SearchSpace::SearchSpace(std::vector<ResourceConfiguration> configs) : configs_(std::move(configs)) {
    if (configs_.empty()) throw std::invalid_argument("search space must be non-empty");
    std::set<std::pair<std::string, int>> seen;
    for (const auto& c : configs_) {
        if (c.nodeCount < 1) throw std::invalid_argument("nodeCount must be >= 1");
        if (!seen.insert({c.machineType, c.nodeCount}).second)
            throw std::invalid_argument("duplicate (machineType, nodeCount) pair in search space");
    }
    lo_ = rawFeatures(configs_.front());
    hi_ = lo_;
    for (const auto& c : configs_) {
        auto f = rawFeatures(c);
        lo_ = lo_.cwiseMin(f);
        hi_ = hi_.cwiseMax(f);
    }
}

Eigen::Matrix<double, kEncodedDim, 1> SearchSpace::rawFeatures(const ResourceConfiguration& c) {
    Eigen::Matrix<double, kEncodedDim, 1> f;
    f << static_cast<double>(c.nodeCount), static_cast<double>(c.perNode.vcpus), c.perNode.memGb,
        static_cast<double>(c.nodeCount) * c.perNode.vcpus, static_cast<double>(c.nodeCount) * c.perNode.memGb;
    return f;
}

std::size_t SearchSpace::indexOf(const ResourceConfiguration& c) const {
    for (std::size_t i = 0; i < configs_.size(); ++i)
        if (configs_[i].samePoint(c)) return i;
    throw std::invalid_argument("configuration (" + c.machineType + ", " + std::to_string(c.nodeCount) +
                                ") is not a member of the search space");
}

bool SearchSpace::contains(const ResourceConfiguration& c) const {
    for (const auto& x : configs_)
        if (x.samePoint(c)) return true;
    return false;
}

EncodedConfig SearchSpace::encode(const ResourceConfiguration& c) const {
    // membership is keyed by (machineType, nodeCount); the per-node spec
    // always comes from the space's own entry
    const auto f = rawFeatures(configs_[indexOf(c)]);
    EncodedConfig out(kEncodedDim);
    for (int i = 0; i < kEncodedDim; ++i) {
        const double range = hi_[i] - lo_[i];
        out[i] = range > 0.0 ? (f[i] - lo_[i]) / range : 0.0;
    }
    return out;
}

}  // namespace karasu

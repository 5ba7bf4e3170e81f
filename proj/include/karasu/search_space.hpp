#ifndef KARASU_SEARCH_SPACE_HPP
#define KARASU_SEARCH_SPACE_HPP

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "karasu/types.hpp"

namespace karasu {

/// Encoded configuration: five features, each min-max normalized to [0,1].
using EncodedConfig = Eigen::VectorXd;

inline constexpr int kEncodedDim = 5;

/// Finite, enumerable set of resource configurations plus the encoder ranges
/// derived from it.
class SearchSpace {
   public:
    explicit SearchSpace(std::vector<ResourceConfiguration> configs);

    const std::vector<ResourceConfiguration>& configurations() const { return configs_; }
    std::size_t size() const { return configs_.size(); }

    /// Index of a configuration in the space, or throws if not a member.
    std::size_t indexOf(const ResourceConfiguration& c) const;
    bool contains(const ResourceConfiguration& c) const;

    /// Min-max normalized feature vector:
    /// [nodeCount, vcpusPerNode, memGbPerNode, totalVcpus, totalMemGb].
    EncodedConfig encode(const ResourceConfiguration& c) const;

   private:
    static Eigen::Matrix<double, kEncodedDim, 1> rawFeatures(const ResourceConfiguration& c);

    std::vector<ResourceConfiguration> configs_;
    Eigen::Matrix<double, kEncodedDim, 1> lo_;
    Eigen::Matrix<double, kEncodedDim, 1> hi_;
};

}  // namespace karasu

#endif

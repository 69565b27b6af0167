#pragma once

#include "cachenet/caching.hpp"
#include "cachenet/netmodel.hpp"
#include "cachenet/popularity.hpp"

#include <cstddef>
#include <cstdint>

namespace cachenet {

/// Every tier-m BS stores the K_m most popular files (ties by ascending id).
CachingMatrix most_popular(const PopularityVector& a, const NetworkConfig& cfg);

/// Every BS fills its cache with K_m successive popularity-weighted draws
/// without replacement; T(m, n) is the inclusion frequency over `samples`
/// simulated placements. Once the remaining files all have zero popularity
/// the rest of the cache is drawn uniformly among them.
CachingMatrix iid_popularity(const PopularityVector& a, const NetworkConfig& cfg, std::size_t samples = 10000,
                             std::uint64_t seed = 1);

}  // namespace cachenet

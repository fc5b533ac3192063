#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "locpriv/geo.hpp"

namespace locpriv {

struct VariogramResult {
    std::vector<double> bin_edges;            // ascending; bin t = (e[t], e[t+1]]
    std::vector<std::optional<double>> gamma; // absent when a bin saw no pairs
    std::vector<std::size_t> pair_counts;
    double subregion_min_x = 0.0, subregion_max_x = 0.0;
    double subregion_min_y = 0.0, subregion_max_y = 0.0;
    std::size_t n_points = 0;   // points inside the subregion
    std::size_t n_pairs = 0;    // sampled pairs
    std::uint64_t seed = 0;
};

// Default doubling lags in meters.
std::vector<double> default_variogram_edges();

// gamma(bin) = fraction of sampled point pairs in that distance bin whose
// categories DIFFER. Pairs are sampled uniformly from the square subregion
// (side `subregion_m`, centered on the point centroid); subregion_m <= 0
// disables the crop. Deterministic under `seed` and independent of the
// thread count (sampling is partitioned into fixed-size blocks with one RNG
// substream each).
VariogramResult semivariogram(const std::vector<LocalPoint>& points,
                              const std::vector<int>& categories,
                              double subregion_m, std::size_t n_pairs,
                              const std::vector<double>& bin_edges,
                              std::uint64_t seed);
VariogramResult semivariogram_serial(const std::vector<LocalPoint>& points,
                                     const std::vector<int>& categories,
                                     double subregion_m, std::size_t n_pairs,
                                     const std::vector<double>& bin_edges,
                                     std::uint64_t seed);

void write_variogram_csv(const std::filesystem::path& path,
                         const VariogramResult& result);

}  // namespace locpriv

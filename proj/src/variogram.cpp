#include "locpriv/variogram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "locpriv/csv.hpp"
#include "locpriv/rng.hpp"

namespace locpriv {

std::vector<double> default_variogram_edges() {
    return {0, 25, 50, 100, 200, 400, 800, 1600, 3200, 6400};
}

namespace {

constexpr std::size_t kBlockSize = 1 << 14;

struct BinCounts {
    std::vector<std::size_t> total;
    std::vector<std::size_t> differ;
};

// One fixed-size block of pair draws with its own substream; the block
// layout is what makes the parallel and serial paths bit-identical.
void sample_block(const std::vector<LocalPoint>& pts, const std::vector<int>& cats,
                  const std::vector<double>& edges, std::uint64_t seed,
                  std::size_t block, std::size_t draws, BinCounts& counts) {
    Rng rng = substream(seed, {0x7a12ULL, block});
    const std::size_t n = pts.size();
    for (std::size_t d = 0; d < draws; ++d) {
        const std::size_t i = rng.below(n);
        std::size_t j = rng.below(n - 1);
        if (j >= i) ++j;
        const double dist = euclidean(pts[i], pts[j]);
        // bin t covers (edges[t], edges[t+1]]
        if (dist <= edges.front() || dist > edges.back()) continue;
        const auto it = std::lower_bound(edges.begin(), edges.end(), dist);
        const std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
        counts.total[bin] += 1;
        if (cats[i] != cats[j]) counts.differ[bin] += 1;
    }
}

VariogramResult variogram_impl(const std::vector<LocalPoint>& points,
                               const std::vector<int>& categories,
                               double subregion_m, std::size_t n_pairs,
                               const std::vector<double>& bin_edges,
                               std::uint64_t seed, bool parallel) {
    if (points.size() != categories.size())
        throw std::invalid_argument("points and categories differ in length");
    if (bin_edges.size() < 2 || !std::is_sorted(bin_edges.begin(), bin_edges.end()))
        throw std::invalid_argument("bin edges must be ascending");

    VariogramResult result;
    result.bin_edges = bin_edges;
    result.seed = seed;

    // Crop to the centered square subregion.
    std::vector<LocalPoint> pts;
    std::vector<int> cats;
    if (subregion_m > 0.0) {
        double cx = 0.0, cy = 0.0;
        for (const auto& p : points) {
            cx += p.x;
            cy += p.y;
        }
        cx /= static_cast<double>(points.size());
        cy /= static_cast<double>(points.size());
        const double half = subregion_m / 2.0;
        result.subregion_min_x = cx - half;
        result.subregion_max_x = cx + half;
        result.subregion_min_y = cy - half;
        result.subregion_max_y = cy + half;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (std::abs(points[i].x - cx) <= half &&
                std::abs(points[i].y - cy) <= half) {
                pts.push_back(points[i]);
                cats.push_back(categories[i]);
            }
        }
    } else {
        pts = points;
        cats = categories;
    }
    if (pts.size() < 2)
        throw std::invalid_argument("fewer than two points in the subregion");
    result.n_points = pts.size();
    result.n_pairs = n_pairs;

    const std::size_t n_bins = bin_edges.size() - 1;
    const std::size_t n_blocks = (n_pairs + kBlockSize - 1) / kBlockSize;
    std::vector<BinCounts> per_block(n_blocks);

#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(n_blocks); ++b) {
        auto& counts = per_block[b];
        counts.total.assign(n_bins, 0);
        counts.differ.assign(n_bins, 0);
        const std::size_t draws =
            b + 1 < static_cast<std::int64_t>(n_blocks) || n_pairs % kBlockSize == 0
                ? kBlockSize
                : n_pairs % kBlockSize;
        sample_block(pts, cats, bin_edges, seed, static_cast<std::size_t>(b),
                     draws, counts);
    }

    std::vector<std::size_t> total(n_bins, 0), differ(n_bins, 0);
    for (const auto& counts : per_block) {
        for (std::size_t t = 0; t < n_bins; ++t) {
            total[t] += counts.total[t];
            differ[t] += counts.differ[t];
        }
    }

    result.pair_counts = total;
    result.gamma.resize(n_bins);
    for (std::size_t t = 0; t < n_bins; ++t)
        if (total[t] > 0)
            result.gamma[t] = static_cast<double>(differ[t]) /
                              static_cast<double>(total[t]);
    return result;
}

}  // namespace

VariogramResult semivariogram(const std::vector<LocalPoint>& points,
                              const std::vector<int>& categories,
                              double subregion_m, std::size_t n_pairs,
                              const std::vector<double>& bin_edges,
                              std::uint64_t seed) {
    return variogram_impl(points, categories, subregion_m, n_pairs, bin_edges,
                          seed, true);
}

VariogramResult semivariogram_serial(const std::vector<LocalPoint>& points,
                                     const std::vector<int>& categories,
                                     double subregion_m, std::size_t n_pairs,
                                     const std::vector<double>& bin_edges,
                                     std::uint64_t seed) {
    return variogram_impl(points, categories, subregion_m, n_pairs, bin_edges,
                          seed, false);
}

void write_variogram_csv(const std::filesystem::path& path,
                         const VariogramResult& result) {
    TableWriter w(path);
    w.write_row({"bin_lo", "bin_hi", "gamma", "n_pairs"});
    for (std::size_t t = 0; t + 1 < result.bin_edges.size(); ++t) {
        w.write_row({fmt_double(result.bin_edges[t]),
                     fmt_double(result.bin_edges[t + 1]),
                     result.gamma[t] ? fmt_double(*result.gamma[t]) : std::string(),
                     fmt_int(static_cast<std::int64_t>(result.pair_counts[t]))});
    }
}

}  // namespace locpriv

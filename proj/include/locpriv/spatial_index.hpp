#pragma once

#include <cstdint>
#include <vector>

#include "locpriv/geo.hpp"

namespace locpriv {

struct Neighbor {
    std::int64_t id = 0;
    double distance = 0.0;  // meters
};

// Read-only 2D kd-tree over local (meter) coordinates. Immutable after
// build(); concurrent queries from multiple threads are safe.
//
// Determinism contract: results match a brute-force linear scan. Equal
// distances are broken by ascending id, both in knn and radius queries.
class SpatialIndex {
public:
    struct Entry {
        std::int64_t id;
        LocalPoint point;
    };

    SpatialIndex() = default;  // empty shell; use build()

    // Throws std::invalid_argument on an empty point set.
    static SpatialIndex build(std::vector<Entry> points);

    std::size_t size() const { return xs_.size(); }

    // The min(k, size()) nearest points, ascending by (distance, id).
    std::vector<Neighbor> knn(LocalPoint q, int k) const;

    // All points with distance <= r, ascending by (distance, id).
    // Throws std::invalid_argument when r <= 0.
    std::vector<Neighbor> radius_query(LocalPoint q, double r) const;

    // Distance to the m-th nearest point (1-based). Throws when m > size().
    double kth_distance(LocalPoint q, int m) const;

private:
    struct Node {
        double split = 0.0;
        int axis = -1;      // -1 marks a leaf
        int left = -1;      // child node index
        int right = -1;
        int begin = 0, end = 0;  // leaf range into the permuted arrays
    };

    int build_node(int begin, int end, int depth);

    // Permuted point storage; node leaves reference contiguous ranges.
    std::vector<double> xs_, ys_;
    std::vector<std::int64_t> ids_;
    std::vector<Node> nodes_;
    int root_ = -1;

    static constexpr int kLeafSize = 16;

    struct KnnCollector;
    template <typename Visitor>
    void search(LocalPoint q, Visitor& visitor) const;
};

// Linear-scan equivalents with the same ordering contract. These are the
// reference path for the benchmark; the unit-test oracle is a separate
// implementation living in test code.
std::vector<Neighbor> scan_knn(const std::vector<SpatialIndex::Entry>& points,
                               LocalPoint q, int k);
std::vector<Neighbor> scan_radius(const std::vector<SpatialIndex::Entry>& points,
                                  LocalPoint q, double r);

}  // namespace locpriv

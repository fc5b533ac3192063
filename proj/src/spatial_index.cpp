#include "locpriv/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace locpriv {

namespace {

inline double sq(double v) { return v * v; }

inline double dist2(double qx, double qy, double px, double py) {
    return sq(px - qx) + sq(py - qy);
}

struct Candidate {
    double d2;
    std::int64_t id;
    int slot;  // index into the permuted arrays

    bool operator<(const Candidate& o) const {
        if (d2 != o.d2) return d2 < o.d2;
        return id < o.id;
    }
};

}  // namespace

SpatialIndex SpatialIndex::build(std::vector<Entry> points) {
    if (points.empty())
        throw std::invalid_argument("SpatialIndex requires at least one point");
    SpatialIndex idx;
    idx.xs_.reserve(points.size());
    idx.ys_.reserve(points.size());
    idx.ids_.reserve(points.size());
    for (const auto& e : points) {
        idx.xs_.push_back(e.point.x);
        idx.ys_.push_back(e.point.y);
        idx.ids_.push_back(e.id);
    }
    idx.nodes_.reserve(2 * points.size() / kLeafSize + 2);
    idx.root_ = idx.build_node(0, static_cast<int>(points.size()), 0);
    return idx;
}

int SpatialIndex::build_node(int begin, int end, int depth) {
    const int node_index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    if (end - begin <= kLeafSize) {
        nodes_[node_index].begin = begin;
        nodes_[node_index].end = end;
        return node_index;
    }

    const int axis = depth % 2;
    auto& coords = axis == 0 ? xs_ : ys_;
    const int mid = begin + (end - begin) / 2;

    // nth_element over a scratch permutation, then apply it to all arrays.
    std::vector<int> perm(end - begin);
    std::iota(perm.begin(), perm.end(), begin);
    std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                     [&](int a, int b) {
                         if (coords[a] != coords[b]) return coords[a] < coords[b];
                         return ids_[a] < ids_[b];
                     });
    std::vector<double> tx(end - begin), ty(end - begin);
    std::vector<std::int64_t> tid(end - begin);
    for (int i = 0; i < end - begin; ++i) {
        tx[i] = xs_[perm[i]];
        ty[i] = ys_[perm[i]];
        tid[i] = ids_[perm[i]];
    }
    std::copy(tx.begin(), tx.end(), xs_.begin() + begin);
    std::copy(ty.begin(), ty.end(), ys_.begin() + begin);
    std::copy(tid.begin(), tid.end(), ids_.begin() + begin);

    nodes_[node_index].axis = axis;
    nodes_[node_index].split = coords[mid];
    const int left = build_node(begin, mid, depth + 1);
    const int right = build_node(mid, end, depth + 1);
    nodes_[node_index].left = left;
    nodes_[node_index].right = right;
    return node_index;
}

// Bounded max-heap of the k best (d2, id) candidates.
struct SpatialIndex::KnnCollector {
    int k;
    std::vector<Candidate> heap;

    bool full() const { return static_cast<int>(heap.size()) >= k; }

    // Pruning bound: squared distance beyond which no candidate can improve.
    double bound() const {
        return full() ? heap.front().d2 : std::numeric_limits<double>::infinity();
    }

    void offer(const Candidate& c) {
        if (!full()) {
            heap.push_back(c);
            std::push_heap(heap.begin(), heap.end());
        } else if (c < heap.front()) {
            std::pop_heap(heap.begin(), heap.end());
            heap.back() = c;
            std::push_heap(heap.begin(), heap.end());
        }
    }
};

template <typename Visitor>
void SpatialIndex::search(LocalPoint q, Visitor& visit) const {
    // Explicit stack; entries carry the squared distance from q to the
    // node's half-plane so whole subtrees can be skipped.
    struct Frame {
        int node;
        double axis_d2;
    };
    std::vector<Frame> stack;
    stack.push_back({root_, 0.0});
    while (!stack.empty()) {
        const Frame f = stack.back();
        stack.pop_back();
        if (f.axis_d2 > visit.bound()) continue;
        const Node& n = nodes_[f.node];
        if (n.axis < 0) {
            for (int i = n.begin; i < n.end; ++i)
                visit.offer({dist2(q.x, q.y, xs_[i], ys_[i]), ids_[i], i});
            continue;
        }
        const double qv = n.axis == 0 ? q.x : q.y;
        const double diff = qv - n.split;
        const int near = diff < 0 ? n.left : n.right;
        const int far = diff < 0 ? n.right : n.left;
        stack.push_back({far, sq(diff)});
        stack.push_back({near, f.axis_d2});
    }
}

std::vector<Neighbor> SpatialIndex::knn(LocalPoint q, int k) const {
    if (k < 1) throw std::invalid_argument("knn requires k >= 1");
    KnnCollector collector{std::min<int>(k, static_cast<int>(size())), {}};
    collector.heap.reserve(collector.k + 1);
    search(q, collector);
    std::sort(collector.heap.begin(), collector.heap.end());
    std::vector<Neighbor> out;
    out.reserve(collector.heap.size());
    for (const auto& c : collector.heap)
        out.push_back({c.id, std::sqrt(c.d2)});
    return out;
}

namespace {
struct RadiusCollector {
    double r2;
    std::vector<Candidate> found;
    double bound() const { return r2; }
    void offer(const Candidate& c) {
        if (c.d2 <= r2) found.push_back(c);
    }
};
}  // namespace

std::vector<Neighbor> SpatialIndex::radius_query(LocalPoint q, double r) const {
    if (!(r > 0.0)) throw std::invalid_argument("radius_query requires r > 0");
    RadiusCollector collector{sq(r), {}};
    search(q, collector);
    std::sort(collector.found.begin(), collector.found.end());
    std::vector<Neighbor> out;
    out.reserve(collector.found.size());
    for (const auto& c : collector.found)
        out.push_back({c.id, std::sqrt(c.d2)});
    return out;
}

double SpatialIndex::kth_distance(LocalPoint q, int m) const {
    if (m < 1 || static_cast<std::size_t>(m) > size())
        throw std::invalid_argument("kth_distance: m out of range");
    KnnCollector collector{m, {}};
    collector.heap.reserve(m + 1);
    search(q, collector);
    return std::sqrt(collector.heap.front().d2);
}

std::vector<Neighbor> scan_knn(const std::vector<SpatialIndex::Entry>& points,
                               LocalPoint q, int k) {
    std::vector<Candidate> all;
    all.reserve(points.size());
    for (const auto& e : points)
        all.push_back({dist2(q.x, q.y, e.point.x, e.point.y), e.id, 0});
    std::sort(all.begin(), all.end());
    const std::size_t n = std::min<std::size_t>(k, all.size());
    std::vector<Neighbor> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {all[i].id, std::sqrt(all[i].d2)};
    return out;
}

std::vector<Neighbor> scan_radius(const std::vector<SpatialIndex::Entry>& points,
                                  LocalPoint q, double r) {
    std::vector<Candidate> hits;
    const double r2 = sq(r);
    for (const auto& e : points) {
        const double d2 = dist2(q.x, q.y, e.point.x, e.point.y);
        if (d2 <= r2) hits.push_back({d2, e.id, 0});
    }
    std::sort(hits.begin(), hits.end());
    std::vector<Neighbor> out(hits.size());
    for (std::size_t i = 0; i < hits.size(); ++i)
        out[i] = {hits[i].id, std::sqrt(hits[i].d2)};
    return out;
}

}  // namespace locpriv

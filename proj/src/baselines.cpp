#include "locpriv/baselines.hpp"

#include <stdexcept>

#include "locpriv/parallel.hpp"

namespace locpriv {

int spatial_join_predict(LocalPoint p, const PoiContext& pois) {
    const auto nearest = pois.index.knn(p, 1);
    return pois.categories[nearest.front().id];
}

std::vector<int> spatial_join_predict(const std::vector<LocalPoint>& points,
                                      const PoiContext& pois) {
    std::vector<int> out(points.size());
    const std::int64_t n = static_cast<std::int64_t>(points.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) out[i] = spatial_join_predict(points[i], pois);
    return out;
}

ClassFrequencyBaseline ClassFrequencyBaseline::fit(const std::vector<int>& labels,
                                                   int n_classes) {
    if (labels.empty()) throw std::invalid_argument("no training labels");
    ClassFrequencyBaseline b;
    b.freq_.assign(n_classes, 0.0);
    for (int label : labels) {
        if (label < 0 || label >= n_classes)
            throw std::invalid_argument("label out of range");
        b.freq_[label] += 1.0;
    }
    for (double& f : b.freq_) f /= static_cast<double>(labels.size());
    return b;
}

std::vector<int> ClassFrequencyBaseline::draw(std::size_t n, Rng& rng) const {
    std::vector<int> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        double acc = 0.0;
        int label = static_cast<int>(freq_.size()) - 1;
        for (std::size_t c = 0; c < freq_.size(); ++c) {
            acc += freq_[c];
            if (u < acc) {
                label = static_cast<int>(c);
                break;
            }
        }
        out[i] = label;
    }
    return out;
}

}  // namespace locpriv

#pragma once

#include <vector>

#include "locpriv/features.hpp"
#include "locpriv/rng.hpp"

namespace locpriv {

// Assigns the category of the nearest public POI; equal distances resolve to
// the lowest POI id via the index's tie rule.
int spatial_join_predict(LocalPoint p, const PoiContext& pois);
std::vector<int> spatial_join_predict(const std::vector<LocalPoint>& points,
                                      const PoiContext& pois);

// Uninformed attacker: i.i.d. categorical draws with the training-set class
// frequencies; the soft output is the constant frequency vector.
class ClassFrequencyBaseline {
public:
    static ClassFrequencyBaseline fit(const std::vector<int>& labels,
                                      int n_classes);

    const std::vector<double>& frequencies() const { return freq_; }
    std::vector<int> draw(std::size_t n, Rng& rng) const;

private:
    std::vector<double> freq_;
};

}  // namespace locpriv

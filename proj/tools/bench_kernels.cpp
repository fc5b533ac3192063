// Times the OpenMP kernels against their serial references on a synthetic
// city. Usage: bench_kernels [n_pois] [n_users] [n_pairs].

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "locpriv/eval.hpp"
#include "locpriv/features.hpp"
#include "locpriv/gbdt.hpp"
#include "locpriv/obfuscate.hpp"
#include "locpriv/parallel.hpp"
#include "locpriv/synth.hpp"
#include "locpriv/variogram.hpp"

using namespace locpriv;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-24s serial %9.1f ms   omp %9.1f ms   speedup %.2fx\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
    const int n_pois = argc > 1 ? std::atoi(argv[1]) : 20000;
    const int n_users = argc > 2 ? std::atoi(argv[2]) : 1500;
    const std::size_t n_pairs =
        argc > 3 ? static_cast<std::size_t>(std::atoll(argv[3])) : 4000000;

    std::printf("threads: %d, pois: %d, users: %d\n", max_threads(), n_pois,
                n_users);

    SynthSpec spec = SynthSpec::basic(8, 99);
    spec.n_pois = n_pois;
    spec.n_users = n_users;
    spec.region_km = 15.0;
    spec.clusters_per_category = 10;
    const SynthCity city = generate(spec);
    const Dataset data = to_dataset(city);
    const Projection proj(spec.anchor);
    std::vector<LocalPoint> pts;
    pts.reserve(data.samples.size());
    for (const auto& s : data.samples) pts.push_back(proj.to_local(s.geo));
    const PoiContext pois = PoiContext::build(city.pois, proj);
    std::printf("samples: %zu\n", data.samples.size());

    {
        ObfuscationPolicy policy;
        policy.mode = ObfuscationPolicy::Mode::context_aware;
        policy.m = 16;
        policy.seed = 1;
        auto t0 = std::chrono::steady_clock::now();
        const auto serial = obfuscate_samples_serial(pts, policy, &pois.index);
        const double serial_ms = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto parallel = obfuscate_samples(pts, policy, &pois.index);
        report("obfuscate (m=16)", serial_ms, ms_since(t0));
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (serial.points[i].x != parallel.points[i].x) {
                std::fprintf(stderr, "MISMATCH in obfuscation outputs\n");
                return 1;
            }
    }

    FeaturizedData feat;
    {
        auto t0 = std::chrono::steady_clock::now();
        const auto serial =
            featurize_serial(data, pts, FeatureMode::spatiotemporal, &pois);
        const double serial_ms = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        feat = featurize(data, pts, FeatureMode::spatiotemporal, &pois);
        report("featurize", serial_ms, ms_since(t0));
        if (serial.X.values != feat.X.values) {
            std::fprintf(stderr, "MISMATCH in feature matrices\n");
            return 1;
        }
    }

    {
        GbdtParams params;
        params.n_rounds = 10;
        params.max_depth = 6;
        params.n_threads = 1;
        auto t0 = std::chrono::steady_clock::now();
        const auto serial =
            GbdtModel::train(feat.X, feat.labels, data.taxonomy.count(), params);
        const double serial_ms = ms_since(t0);
        params.n_threads = 0;
        t0 = std::chrono::steady_clock::now();
        const auto parallel =
            GbdtModel::train(feat.X, feat.labels, data.taxonomy.count(), params);
        report("gbdt train (10 rounds)", serial_ms, ms_since(t0));
        if (serial.predict_proba(feat.X) != parallel.predict_proba(feat.X)) {
            std::fprintf(stderr, "MISMATCH in trained models\n");
            return 1;
        }
    }

    {
        std::vector<LocalPoint> poi_pts = pois.points;
        auto t0 = std::chrono::steady_clock::now();
        const auto serial = semivariogram_serial(
            poi_pts, pois.categories, 0.0, n_pairs, default_variogram_edges(), 3);
        const double serial_ms = ms_since(t0);
        t0 = std::chrono::steady_clock::now();
        const auto parallel = semivariogram(poi_pts, pois.categories, 0.0,
                                            n_pairs, default_variogram_edges(), 3);
        report("variogram", serial_ms, ms_since(t0));
        if (serial.pair_counts != parallel.pair_counts) {
            std::fprintf(stderr, "MISMATCH in variogram counts\n");
            return 1;
        }
    }

    return 0;
}

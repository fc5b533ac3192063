#pragma once

#include <string>
#include <vector>

#include "locpriv/eval.hpp"
#include "locpriv/ingest.hpp"

namespace locpriv {

// Normalized category-frequency vector of one user.
struct UserProfile {
    std::string user_id;
    std::vector<double> p;       // sums to 1
    double total_weight = 0.0;
};

enum class ProfileWeighting { visits, locations };
enum class ProfileMode { hard, soft };

// Ground-truth profiles from the samples' true categories; with `visits`
// weighting a location contributes its visit count, with `locations` each
// location counts once. Sorted by user_id.
std::vector<UserProfile> true_profiles(const Dataset& data,
                                       ProfileWeighting weighting);

// Profiles from per-sample predictions: hard aggregates argmax labels,
// soft averages the predicted probability rows (weighted the same way).
// Soft mode throws when a sample has no probability row.
std::vector<UserProfile> predicted_profiles(const Dataset& data,
                                            const std::vector<SampleOutcome>& outcomes,
                                            ProfileMode mode,
                                            ProfileWeighting weighting);

// Euclidean distance between two profiles; throws on dimension mismatch.
double profiling_error(const UserProfile& a, const UserProfile& b);

double mean_profiling_error(const std::vector<UserProfile>& predicted,
                            const std::vector<UserProfile>& truth);

// Fraction of users whose true profile ranks among the k pool profiles
// nearest to their predicted profile (ties by ascending user id).
double reidentify(const std::vector<UserProfile>& predicted,
                  const std::vector<UserProfile>& pool, int k);

inline constexpr double kSimilarityEpsilon = 1e-6;

// PL(u) = softmax_i(1 / (E(predicted(u), pool_i) + eps)) at the true user,
// times |pool| (the ratio to the uniform 1/|U| baseline).
std::vector<double> privacy_losses(const std::vector<UserProfile>& predicted,
                                   const std::vector<UserProfile>& pool);

struct PrivacyLossReport {
    std::vector<double> per_user;  // aligned with the predicted profiles
    double median = 0.0;
    std::vector<std::pair<double, double>> cdf;  // (PL, cumulative fraction)
    double hit_at_1 = 0.0;
    double hit_at_5 = 0.0;
};

PrivacyLossReport privacy_loss_report(const std::vector<UserProfile>& predicted,
                                      const std::vector<UserProfile>& pool);

double median_of(std::vector<double> values);

struct DecayFit {
    double a = 0.0;       // asymptote
    double c = 0.0;       // amplitude
    double lambda = 0.0;  // decay rate per meter
    double rss = 0.0;
};

// Least squares for f(x) = a + c * exp(-lambda x): golden-section search on
// lambda in [0, 0.1] with a closed-form (a, c) solve at each step. Requires
// >= 3 points with distinct xs; constant ys collapse to c = 0, a = mean.
DecayFit fit_decay(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace locpriv

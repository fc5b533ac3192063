#include "locpriv/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "locpriv/parallel.hpp"

namespace locpriv {

namespace {

constexpr double kMinGain = 1e-12;
constexpr const char* kFormatVersion = "gbdt-1";

struct SplitCandidate {
    double gain = 0.0;
    int feature = -1;
    double threshold = 0.0;
};

double leaf_weight(double g, double h, double lambda) {
    const double denom = h + lambda;
    if (denom <= 1e-12) return 0.0;
    return -g / denom;
}

double gain_term(double g, double h, double lambda) {
    const double denom = h + lambda;
    if (denom <= 1e-12) return 0.0;
    return g * g / denom;
}

// Level-wise exact greedy builder. Feature columns are scanned in presorted
// order; per-node statistics are always accumulated in the canonical order
// of feature 0 so the fitted tree does not depend on row order.
class TreeBuilder {
public:
    TreeBuilder(const std::vector<double>& cols, std::size_t n, std::size_t f,
                const std::vector<std::vector<int>>& order,
                const GbdtParams& params)
        : cols_(cols), n_(n), n_features_(f), order_(order), params_(params) {}

    Tree build(const std::vector<double>& g, const std::vector<double>& h,
               std::vector<int>& node_of) {
        Tree tree;
        node_of.assign(n_, 0);
        tree.nodes.emplace_back();
        node_g_.assign(1, 0.0);
        node_h_.assign(1, 0.0);
        node_count_.assign(1, 0);
        recompute_stats({0}, g, h, node_of);

        std::vector<int> active = {0};
        for (int depth = 0; depth < params_.max_depth && !active.empty(); ++depth) {
            const auto best = find_best_splits(active, g, h, node_of);
            std::vector<int> next_active;
            std::vector<int> split_feature(tree.nodes.size(), -1);
            std::vector<double> split_threshold(tree.nodes.size(), 0.0);
            std::vector<std::pair<int, int>> split_children(tree.nodes.size());
            bool any_split = false;
            for (std::size_t a = 0; a < active.size(); ++a) {
                const int nid = active[a];
                if (best[a].feature < 0 || best[a].gain <= kMinGain) {
                    finalize_leaf(tree, nid);
                    continue;
                }
                const int left = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                const int right = static_cast<int>(tree.nodes.size());
                tree.nodes.emplace_back();
                tree.nodes[nid].feature = best[a].feature;
                tree.nodes[nid].threshold = best[a].threshold;
                tree.nodes[nid].left = left;
                tree.nodes[nid].right = right;
                tree.nodes[nid].gain = best[a].gain;
                split_feature[nid] = best[a].feature;
                split_threshold[nid] = best[a].threshold;
                split_children[nid] = {left, right};
                next_active.push_back(left);
                next_active.push_back(right);
                any_split = true;
            }
            if (any_split) {
                for (std::size_t s = 0; s < n_; ++s) {
                    const int nid = node_of[s];
                    if (nid < static_cast<int>(split_feature.size()) &&
                        split_feature[nid] >= 0) {
                        const double v = cols_[split_feature[nid] * n_ + s];
                        node_of[s] = v <= split_threshold[nid]
                                         ? split_children[nid].first
                                         : split_children[nid].second;
                    }
                }
            }
            node_g_.resize(tree.nodes.size(), 0.0);
            node_h_.resize(tree.nodes.size(), 0.0);
            node_count_.resize(tree.nodes.size(), 0);
            if (!next_active.empty()) recompute_stats(next_active, g, h, node_of);
            active = std::move(next_active);
        }
        for (int nid : active) finalize_leaf(tree, nid);
        return tree;
    }

private:
    void finalize_leaf(Tree& tree, int nid) {
        tree.nodes[nid].feature = -1;
        tree.nodes[nid].value =
            params_.learning_rate *
            leaf_weight(node_g_[nid], node_h_[nid], params_.reg_lambda);
    }

    // Accumulates G/H/count for the given nodes in feature-0 sorted order.
    void recompute_stats(const std::vector<int>& nodes, const std::vector<double>& g,
                         const std::vector<double>& h,
                         const std::vector<int>& node_of) {
        for (int nid : nodes) {
            node_g_[nid] = 0.0;
            node_h_[nid] = 0.0;
            node_count_[nid] = 0;
        }
        std::vector<char> wanted(node_g_.size(), 0);
        for (int nid : nodes) wanted[nid] = 1;
        for (int idx : order_[0]) {
            const int nid = node_of[idx];
            if (!wanted[nid]) continue;
            node_g_[nid] += g[idx];
            node_h_[nid] += h[idx];
            node_count_[nid] += 1;
        }
    }

    std::vector<SplitCandidate> find_best_splits(const std::vector<int>& active,
                                                 const std::vector<double>& g,
                                                 const std::vector<double>& h,
                                                 const std::vector<int>& node_of) {
        const int n_active = static_cast<int>(active.size());
        std::vector<int> slot_of(node_g_.size(), -1);
        for (int a = 0; a < n_active; ++a) slot_of[active[a]] = a;

        const int n_feat = static_cast<int>(n_features_);
        std::vector<SplitCandidate> per_feature(
            static_cast<std::size_t>(n_feat) * n_active);

        const int nt = resolve_threads(params_.n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
        for (int f = 0; f < n_feat; ++f) {
            std::vector<double> run_g(n_active, 0.0), run_h(n_active, 0.0);
            std::vector<int> run_cnt(n_active, 0);
            std::vector<double> prev(n_active, 0.0);
            std::vector<char> started(n_active, 0);
            SplitCandidate* best = per_feature.data() +
                                   static_cast<std::size_t>(f) * n_active;
            const double* col = cols_.data() + static_cast<std::size_t>(f) * n_;
            for (int idx : order_[f]) {
                const int nid = node_of[idx];
                const int slot = slot_of[nid];
                if (slot < 0) continue;
                const double v = col[idx];
                if (started[slot] && v > prev[slot] &&
                    run_cnt[slot] >= params_.min_samples_leaf &&
                    node_count_[nid] - run_cnt[slot] >= params_.min_samples_leaf) {
                    const double gl = run_g[slot], hl = run_h[slot];
                    const double gr = node_g_[nid] - gl, hr = node_h_[nid] - hl;
                    const double gain =
                        0.5 * (gain_term(gl, hl, params_.reg_lambda) +
                               gain_term(gr, hr, params_.reg_lambda) -
                               gain_term(node_g_[nid], node_h_[nid],
                                         params_.reg_lambda));
                    if (gain > best[slot].gain) {
                        best[slot].gain = gain;
                        best[slot].feature = f;
                        best[slot].threshold = 0.5 * (prev[slot] + v);
                    }
                }
                run_g[slot] += g[idx];
                run_h[slot] += h[idx];
                run_cnt[slot] += 1;
                prev[slot] = v;
                started[slot] = 1;
            }
        }

        // Sequential reduce in ascending feature order; strict > keeps the
        // lowest feature index on gain ties.
        std::vector<SplitCandidate> best(n_active);
        for (int f = 0; f < n_feat; ++f) {
            const SplitCandidate* cand = per_feature.data() +
                                         static_cast<std::size_t>(f) * n_active;
            for (int a = 0; a < n_active; ++a)
                if (cand[a].feature >= 0 && cand[a].gain > best[a].gain)
                    best[a] = cand[a];
        }
        return best;
    }

    const std::vector<double>& cols_;  // column-major, n_ per feature
    std::size_t n_;
    std::size_t n_features_;
    const std::vector<std::vector<int>>& order_;
    const GbdtParams& params_;

    std::vector<double> node_g_, node_h_;
    std::vector<int> node_count_;
};

}  // namespace

void softmax_rows(std::vector<double>& scores, std::size_t n_rows,
                  std::size_t n_cols) {
    for (std::size_t r = 0; r < n_rows; ++r) {
        double* row = scores.data() + r * n_cols;
        double mx = row[0];
        for (std::size_t c = 1; c < n_cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < n_cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (std::size_t c = 0; c < n_cols; ++c) row[c] /= sum;
    }
}

GbdtModel GbdtModel::train(const FeatureMatrix& X, const std::vector<int>& y,
                           int n_classes, const GbdtParams& params,
                           std::vector<std::string> class_names) {
    const std::size_t n = X.n_rows;
    const std::size_t f = X.n_cols;
    if (n == 0 || f == 0) throw std::invalid_argument("empty training matrix");
    if (y.size() != n) throw std::invalid_argument("label count mismatch");
    for (double v : X.values)
        if (!std::isfinite(v))
            throw std::invalid_argument("non-finite feature value in training data");
    std::vector<char> seen(n_classes, 0);
    for (int label : y) {
        if (label < 0 || label >= n_classes)
            throw std::invalid_argument("label out of range");
        seen[label] = 1;
    }
    if (std::count(seen.begin(), seen.end(), 1) < 2)
        throw std::invalid_argument("training labels contain a single class");

    GbdtModel model;
    model.params_ = params;
    model.n_classes_ = n_classes;
    model.feature_names_ = X.columns;
    model.class_names_ = std::move(class_names);

    // Column-major copy and one presort per feature, reused across rounds.
    std::vector<double> cols(f * n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < f; ++c) cols[c * n + r] = X.at(r, c);
    std::vector<std::vector<int>> order(f, std::vector<int>(n));
    {
        const int nt = resolve_threads(params.n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
        for (std::int64_t c = 0; c < static_cast<std::int64_t>(f); ++c) {
            auto& ord = order[c];
            for (std::size_t i = 0; i < n; ++i) ord[i] = static_cast<int>(i);
            const double* col = cols.data() + c * n;
            std::sort(ord.begin(), ord.end(), [col](int a, int b) {
                if (col[a] != col[b]) return col[a] < col[b];
                return a < b;
            });
        }
    }

    std::vector<double> scores(n * n_classes, 0.0);
    std::vector<double> proba(n * n_classes);
    std::vector<double> g(n), h(n);
    std::vector<int> node_of;
    TreeBuilder builder(cols, n, f, order, params);

    for (int round = 0; round < params.n_rounds; ++round) {
        proba = scores;
        softmax_rows(proba, n, n_classes);

        std::vector<Tree> round_trees;
        round_trees.reserve(n_classes);
        for (int c = 0; c < n_classes; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                const double p = proba[i * n_classes + c];
                g[i] = p - (y[i] == c ? 1.0 : 0.0);
                h[i] = p * (1.0 - p);
            }
            Tree tree = builder.build(g, h, node_of);
            for (std::size_t i = 0; i < n; ++i)
                scores[i * n_classes + c] += tree.nodes[node_of[i]].value;
            round_trees.push_back(std::move(tree));
        }
        model.trees_.push_back(std::move(round_trees));

        proba = scores;
        softmax_rows(proba, n, n_classes);
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            ll -= std::log(std::max(proba[i * n_classes + y[i]], 1e-15));
        model.train_log_loss_.push_back(ll / static_cast<double>(n));
    }
    return model;
}

void GbdtModel::check_schema(const FeatureMatrix& X) const {
    if (X.columns != feature_names_)
        throw std::invalid_argument("feature schema does not match the trained model");
}

void GbdtModel::accumulate_scores(const FeatureMatrix& X,
                                  std::vector<double>& scores) const {
    const std::size_t n = X.n_rows;
    scores.assign(n * n_classes_, 0.0);
    const std::int64_t rows = static_cast<std::int64_t>(n);
    const int nt = resolve_threads(params_.n_threads);
#pragma omp parallel for schedule(static) num_threads(nt)
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* row = X.row(i);
        double* out = scores.data() + i * n_classes_;
        for (const auto& round : trees_)
            for (int c = 0; c < n_classes_; ++c) out[c] += round[c].predict(row);
    }
}

std::vector<double> GbdtModel::predict_proba(const FeatureMatrix& X) const {
    check_schema(X);
    std::vector<double> scores;
    accumulate_scores(X, scores);
    softmax_rows(scores, X.n_rows, n_classes_);
    return scores;
}

std::vector<int> GbdtModel::predict(const FeatureMatrix& X) const {
    const auto proba = predict_proba(X);
    std::vector<int> labels(X.n_rows);
    for (std::size_t i = 0; i < X.n_rows; ++i) {
        const double* row = proba.data() + i * n_classes_;
        int best = 0;
        for (int c = 1; c < n_classes_; ++c)
            if (row[c] > row[best]) best = c;
        labels[i] = best;
    }
    return labels;
}

std::string GbdtModel::to_json_string() const {
    nlohmann::json j;
    j["format"] = kFormatVersion;
    j["n_classes"] = n_classes_;
    j["class_names"] = class_names_;
    j["feature_names"] = feature_names_;
    j["params"] = {{"learning_rate", params_.learning_rate},
                   {"n_rounds", params_.n_rounds},
                   {"max_depth", params_.max_depth},
                   {"min_samples_leaf", params_.min_samples_leaf},
                   {"reg_lambda", params_.reg_lambda}};
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& round : trees_) {
        nlohmann::json round_json = nlohmann::json::array();
        for (const auto& tree : round) {
            nlohmann::json t;
            for (const auto& node : tree.nodes) {
                t["feature"].push_back(node.feature);
                t["threshold"].push_back(node.threshold);
                t["left"].push_back(node.left);
                t["right"].push_back(node.right);
                t["value"].push_back(node.value);
                t["gain"].push_back(node.gain);
            }
            round_json.push_back(std::move(t));
        }
        rounds.push_back(std::move(round_json));
    }
    j["trees"] = std::move(rounds);
    return j.dump();
}

GbdtModel GbdtModel::from_json_string(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kFormatVersion)
        throw std::runtime_error("unsupported model format: " +
                                 j.at("format").get<std::string>());
    GbdtModel model;
    model.n_classes_ = j.at("n_classes").get<int>();
    model.class_names_ = j.at("class_names").get<std::vector<std::string>>();
    model.feature_names_ = j.at("feature_names").get<std::vector<std::string>>();
    const auto& p = j.at("params");
    model.params_.learning_rate = p.at("learning_rate").get<double>();
    model.params_.n_rounds = p.at("n_rounds").get<int>();
    model.params_.max_depth = p.at("max_depth").get<int>();
    model.params_.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    model.params_.reg_lambda = p.at("reg_lambda").get<double>();
    for (const auto& round_json : j.at("trees")) {
        std::vector<Tree> round;
        for (const auto& t : round_json) {
            Tree tree;
            const auto& feature = t.at("feature");
            const std::size_t n = feature.size();
            tree.nodes.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                tree.nodes[i].feature = t.at("feature")[i].get<int>();
                tree.nodes[i].threshold = t.at("threshold")[i].get<double>();
                tree.nodes[i].left = t.at("left")[i].get<int>();
                tree.nodes[i].right = t.at("right")[i].get<int>();
                tree.nodes[i].value = t.at("value")[i].get<double>();
                tree.nodes[i].gain = t.at("gain")[i].get<double>();
            }
            round.push_back(std::move(tree));
        }
        model.trees_.push_back(std::move(round));
    }
    return model;
}

void GbdtModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file " + path.string());
    out << to_json_string();
}

GbdtModel GbdtModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read model file " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return from_json_string(text);
}

}  // namespace locpriv

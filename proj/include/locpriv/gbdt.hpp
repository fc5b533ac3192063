#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "locpriv/features.hpp"

namespace locpriv {

struct GbdtParams {
    double learning_rate = 0.3;
    int n_rounds = 100;
    int max_depth = 10;
    int min_samples_leaf = 5;
    double reg_lambda = 1.0;  // L2 on leaf weights
    int n_threads = 0;        // 0 = OpenMP default
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf value, learning rate already applied
    double gain = 0.0;   // split gain (internal nodes only)
};

struct Tree {
    std::vector<TreeNode> nodes;

    double predict(const double* row) const {
        int i = 0;
        while (nodes[i].feature >= 0)
            i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left
                                                            : nodes[i].right;
        return nodes[i].value;
    }
};

// Multiclass gradient boosting with a softmax objective: each round fits one
// regression tree per class to the log-loss gradient (g = p - 1{y=c}) with
// second-order leaf weights (h = p(1-p)). Exact greedy splits over all
// features; deterministic regardless of row order and thread count (split
// ties broken by lowest feature index, then lowest threshold; all stat
// reductions run in a canonical order).
class GbdtModel {
public:
    static GbdtModel train(const FeatureMatrix& X, const std::vector<int>& y,
                           int n_classes, const GbdtParams& params,
                           std::vector<std::string> class_names = {});

    // Row-major n x C matrix; rows sum to 1.
    std::vector<double> predict_proba(const FeatureMatrix& X) const;
    // argmax of predict_proba, ties to the lowest class index.
    std::vector<int> predict(const FeatureMatrix& X) const;

    int n_classes() const { return n_classes_; }
    const GbdtParams& params() const { return params_; }
    const std::vector<std::string>& feature_names() const { return feature_names_; }
    const std::vector<std::string>& class_names() const { return class_names_; }
    // trees()[round][class]
    const std::vector<std::vector<Tree>>& trees() const { return trees_; }
    // Training-set log loss after each round.
    const std::vector<double>& train_log_loss() const { return train_log_loss_; }

    std::string to_json_string() const;
    static GbdtModel from_json_string(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static GbdtModel load(const std::filesystem::path& path);

private:
    GbdtParams params_;
    int n_classes_ = 0;
    std::vector<std::string> feature_names_;
    std::vector<std::string> class_names_;
    std::vector<std::vector<Tree>> trees_;
    std::vector<double> train_log_loss_;

    void check_schema(const FeatureMatrix& X) const;
    void accumulate_scores(const FeatureMatrix& X, std::vector<double>& scores) const;
};

// Row-major in-place softmax with max subtraction.
void softmax_rows(std::vector<double>& scores, std::size_t n_rows,
                  std::size_t n_cols);

}  // namespace locpriv

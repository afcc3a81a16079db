#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flowforge/ml/labelled_matrix.hpp"

namespace flowforge::ml {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unlimited
    int min_leaf = 1;
    std::uint64_t seed = 0;
    bool bootstrap = true;
    int max_features = 0;  // 0 = floor(sqrt(p))
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;  // x <= threshold goes left
    int left = -1;
    int right = -1;
    std::vector<double> class_counts;  // leaves only
};

class DecisionTree {
public:
    /// CART with Gini impurity on the given (possibly repeated) sample indices.
    static DecisionTree fit(const LabelledMatrix& train, std::span<const std::size_t> samples,
                            const ForestParams& params, std::uint64_t seed);

    int predict_one(std::span<const double> row) const;

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    /// Weighted impurity decrease per feature, unnormalized.
    const std::vector<double>& impurity_decrease() const { return impurity_decrease_; }
    int depth() const;

private:
    std::vector<TreeNode> nodes_;
    std::vector<double> impurity_decrease_;
};

struct FeatureImportance {
    std::string feature;
    std::size_t index = 0;
    double importance = 0.0;
};

class ForestModel {
public:
    /// Throws DataError for an empty training set or n_trees < 1.
    static ForestModel fit(const LabelledMatrix& train, const ForestParams& params);

    /// Majority vote over trees; ties go to the smallest class id.
    int predict_one(std::span<const double> row) const;
    std::vector<int> predict(const Matrix& rows) const;

    /// Mean decrease in impurity, normalized to sum 1, in descending order
    /// (ties by column order).
    std::vector<FeatureImportance> importance() const;

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const ForestParams& params() const { return params_; }

private:
    ForestParams params_;
    int class_count_ = 0;
    std::vector<std::string> feature_names_;
    std::vector<DecisionTree> trees_;
};

}  // namespace flowforge::ml

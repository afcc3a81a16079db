#include "flowforge/ml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "flowforge/error.hpp"
#include "flowforge/rng.hpp"

namespace flowforge::ml {

namespace {

double gini(std::span<const double> counts, double n)
{
    if (n <= 0.0) return 0.0;
    double s = 0.0;
    for (double c : counts) s += (c / n) * (c / n);
    return 1.0 - s;
}

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double improvement = 0.0;
};

struct Pending {
    int node;
    std::size_t begin;
    std::size_t end;
    int depth;
};

int argmax(std::span<const double> v)
{
    return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

DecisionTree DecisionTree::fit(const LabelledMatrix& train, std::span<const std::size_t> samples,
                               const ForestParams& params, std::uint64_t seed)
{
    const std::size_t p = train.rows.cols();
    const auto k = static_cast<std::size_t>(train.class_count());
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params.min_leaf));
    const std::size_t max_features =
        params.max_features > 0 ? std::min<std::size_t>(p, static_cast<std::size_t>(params.max_features))
                                : std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(double(p)))));
    Rng rng(seed);

    DecisionTree tree;
    tree.impurity_decrease_.assign(p, 0.0);
    std::vector<std::size_t> idx(samples.begin(), samples.end());
    std::vector<std::size_t> features(p);
    std::vector<std::pair<double, int>> column;
    std::vector<double> left(k), right(k);

    tree.nodes_.emplace_back();
    std::vector<Pending> stack{{0, 0, idx.size(), 0}};
    while (!stack.empty()) {
        const Pending cur = stack.back();
        stack.pop_back();
        const std::size_t n = cur.end - cur.begin;

        std::vector<double> counts(k, 0.0);
        for (std::size_t i = cur.begin; i < cur.end; ++i) counts[static_cast<std::size_t>(train.labels[idx[i]])] += 1.0;
        const double parent_gini = gini(counts, double(n));

        auto make_leaf = [&] {
            tree.nodes_[cur.node].class_counts = counts;
        };
        const bool depth_capped = params.max_depth > 0 && cur.depth >= params.max_depth;
        if (parent_gini <= 0.0 || depth_capped || n < 2 * min_leaf) {
            make_leaf();
            continue;
        }

        // Draw features without replacement until max_features non-constant
        // ones have been examined or none remain.
        std::iota(features.begin(), features.end(), std::size_t{0});
        Split best;
        std::size_t examined = 0;
        for (std::size_t drawn = 0; drawn < p && examined < max_features; ++drawn) {
            std::swap(features[drawn], features[drawn + rng.index(p - drawn)]);
            const std::size_t f = features[drawn];

            column.clear();
            for (std::size_t i = cur.begin; i < cur.end; ++i) column.emplace_back(train.rows(idx[i], f), train.labels[idx[i]]);
            std::sort(column.begin(), column.end());
            if (column.front().first == column.back().first) continue;
            ++examined;

            std::fill(left.begin(), left.end(), 0.0);
            right = counts;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const auto c = static_cast<std::size_t>(column[i].second);
                left[c] += 1.0;
                right[c] -= 1.0;
                const std::size_t nl = i + 1, nr = n - nl;
                if (column[i].first == column[i + 1].first || nl < min_leaf || nr < min_leaf) continue;
                const double improvement =
                    double(n) * parent_gini - double(nl) * gini(left, double(nl)) - double(nr) * gini(right, double(nr));
                if (best.feature < 0 || improvement > best.improvement) {
                    const double lo = column[i].first, hi = column[i + 1].first;
                    double t = lo + (hi - lo) / 2.0;
                    if (t >= hi) t = lo;
                    best = {static_cast<int>(f), t, improvement};
                }
            }
        }
        if (best.feature < 0) {
            make_leaf();
            continue;
        }

        const auto f = static_cast<std::size_t>(best.feature);
        const auto mid = std::stable_partition(idx.begin() + static_cast<std::ptrdiff_t>(cur.begin),
                                               idx.begin() + static_cast<std::ptrdiff_t>(cur.end),
                                               [&](std::size_t s) { return train.rows(s, f) <= best.threshold; });
        const auto split_at = static_cast<std::size_t>(mid - idx.begin());
        tree.impurity_decrease_[f] += best.improvement;

        const int left_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        const int right_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        TreeNode& node = tree.nodes_[cur.node];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left = left_id;
        node.right = right_id;
        stack.push_back({right_id, split_at, cur.end, cur.depth + 1});
        stack.push_back({left_id, cur.begin, split_at, cur.depth + 1});
    }
    return tree;
}

int DecisionTree::predict_one(std::span<const double> row) const
{
    int i = 0;
    while (nodes_[i].feature >= 0) {
        i = row[static_cast<std::size_t>(nodes_[i].feature)] <= nodes_[i].threshold ? nodes_[i].left : nodes_[i].right;
    }
    return argmax(nodes_[i].class_counts);
}

int DecisionTree::depth() const
{
    std::vector<int> d(nodes_.size(), 0);
    int deepest = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        deepest = std::max(deepest, d[i]);
        if (nodes_[i].feature >= 0) {
            d[static_cast<std::size_t>(nodes_[i].left)] = d[i] + 1;
            d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
        }
    }
    return deepest;
}

ForestModel ForestModel::fit(const LabelledMatrix& train, const ForestParams& params)
{
    train.check();
    if (train.size() == 0) throw DataError("random forest: empty training set");
    if (params.n_trees < 1) throw DataError("random forest: n_trees must be at least 1");

    ForestModel model;
    model.params_ = params;
    model.class_count_ = train.class_count();
    model.feature_names_ = train.feature_names;
    const std::size_t n = train.size();
    std::vector<std::size_t> samples(n);
    for (int t = 0; t < params.n_trees; ++t) {
        const std::uint64_t tree_seed = derive_seed(params.seed, static_cast<std::uint64_t>(t));
        if (params.bootstrap) {
            Rng rng(tree_seed);
            for (auto& s : samples) s = rng.index(n);
        } else {
            std::iota(samples.begin(), samples.end(), std::size_t{0});
        }
        model.trees_.push_back(DecisionTree::fit(train, samples, params, derive_seed(tree_seed, 1)));
    }
    return model;
}

int ForestModel::predict_one(std::span<const double> row) const
{
    std::vector<double> votes(static_cast<std::size_t>(class_count_), 0.0);
    for (const auto& tree : trees_) votes[static_cast<std::size_t>(tree.predict_one(row))] += 1.0;
    return argmax(votes);
}

std::vector<int> ForestModel::predict(const Matrix& rows) const
{
    std::vector<int> out;
    out.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(predict_one(rows.row(i)));
    return out;
}

std::vector<FeatureImportance> ForestModel::importance() const
{
    const std::size_t p = trees_.empty() ? 0 : trees_.front().impurity_decrease().size();
    std::vector<double> total(p, 0.0);
    for (const auto& tree : trees_) {
        const auto& dec = tree.impurity_decrease();
        const double sum = std::accumulate(dec.begin(), dec.end(), 0.0);
        if (sum <= 0.0) continue;
        for (std::size_t j = 0; j < p; ++j) total[j] += dec[j] / sum;
    }
    const double sum = std::accumulate(total.begin(), total.end(), 0.0);
    std::vector<FeatureImportance> out;
    for (std::size_t j = 0; j < p; ++j) {
        const std::string name = j < feature_names_.size() ? feature_names_[j] : "f" + std::to_string(j);
        out.push_back({name, j, sum > 0.0 ? total[j] / sum : 0.0});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const FeatureImportance& a, const FeatureImportance& b) { return a.importance > b.importance; });
    return out;
}

}  // namespace flowforge::ml

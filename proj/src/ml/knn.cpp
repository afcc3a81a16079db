#include "flowforge/ml/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flowforge/error.hpp"

namespace flowforge::ml {

Standardizer Standardizer::fit(const Matrix& rows)
{
    Standardizer s;
    const std::size_t n = rows.rows(), p = rows.cols();
    s.means_.assign(p, 0.0);
    s.scales_.assign(p, 1.0);
    if (n == 0) return s;
    for (std::size_t j = 0; j < p; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += rows(i, j);
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (rows(i, j) - mean) * (rows(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        s.means_[j] = mean;
        s.scales_[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

void Standardizer::apply(std::span<const double> in, std::span<double> out) const
{
    for (std::size_t j = 0; j < in.size(); ++j) out[j] = (in[j] - means_[j]) / scales_[j];
}

Matrix Standardizer::transform(const Matrix& rows) const
{
    Matrix out(rows.rows(), rows.cols());
    for (std::size_t i = 0; i < rows.rows(); ++i) apply(rows.row(i), out.row(i));
    return out;
}

KnnModel KnnModel::fit(const LabelledMatrix& train, int k)
{
    train.check();
    if (train.size() == 0) throw DataError("KNN: empty training set");
    if (k < 1 || static_cast<std::size_t>(k) > train.size()) {
        throw DataError("KNN: k must lie in 1.." + std::to_string(train.size()) + ", got " + std::to_string(k));
    }
    KnnModel m;
    m.k_ = k;
    m.class_count_ = train.class_count();
    m.scaler_ = Standardizer::fit(train.rows);
    m.train_ = m.scaler_.transform(train.rows);
    m.labels_ = train.labels;
    return m;
}

int KnnModel::predict_one(std::span<const double> row) const
{
    if (row.size() != train_.cols()) throw DataError("KNN: query has wrong number of columns");
    std::vector<double> q(row.size());
    scaler_.apply(row, q);

    // (distance, index) of the k best so far, kept sorted.
    std::vector<std::pair<double, std::size_t>> best;
    best.reserve(static_cast<std::size_t>(k_) + 1);
    for (std::size_t i = 0; i < train_.rows(); ++i) {
        const auto r = train_.row(i);
        double d = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) d += (r[j] - q[j]) * (r[j] - q[j]);
        if (best.size() == static_cast<std::size_t>(k_) && d >= best.back().first) continue;
        const auto pos = std::upper_bound(best.begin(), best.end(), std::make_pair(d, i));
        best.insert(pos, {d, i});
        if (best.size() > static_cast<std::size_t>(k_)) best.pop_back();
    }

    std::vector<int> votes(static_cast<std::size_t>(class_count_), 0);
    for (const auto& [d, i] : best) ++votes[static_cast<std::size_t>(labels_[i])];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

std::vector<int> KnnModel::predict(const Matrix& rows) const
{
    std::vector<int> out;
    out.reserve(rows.rows());
    for (std::size_t i = 0; i < rows.rows(); ++i) out.push_back(predict_one(rows.row(i)));
    return out;
}

}  // namespace flowforge::ml

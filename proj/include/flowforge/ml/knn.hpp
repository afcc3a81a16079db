#pragma once

#include <span>
#include <vector>

#include "flowforge/ml/labelled_matrix.hpp"

namespace flowforge::ml {

/// Per-column z-score; zero-variance columns keep scale 1.
class Standardizer {
public:
    static Standardizer fit(const Matrix& rows);

    void apply(std::span<const double> in, std::span<double> out) const;
    Matrix transform(const Matrix& rows) const;

    const std::vector<double>& means() const { return means_; }
    const std::vector<double>& scales() const { return scales_; }

private:
    std::vector<double> means_;
    std::vector<double> scales_;
};

/// Brute-force k-nearest-neighbour classifier in standardized Euclidean space.
class KnnModel {
public:
    /// Throws DataError for an empty training set and for k outside 1..n.
    static KnnModel fit(const LabelledMatrix& train, int k);

    /// Majority among the k nearest rows (distance ties resolved by training
    /// order); vote ties go to the smallest class id.
    int predict_one(std::span<const double> row) const;
    std::vector<int> predict(const Matrix& rows) const;

    int k() const { return k_; }

private:
    int k_ = 1;
    int class_count_ = 0;
    Standardizer scaler_;
    Matrix train_;  // standardized
    std::vector<int> labels_;
};

}  // namespace flowforge::ml

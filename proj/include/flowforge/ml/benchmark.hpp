#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flowforge/dataset.hpp"
#include "flowforge/ml/forest.hpp"
#include "flowforge/ml/knn.hpp"
#include "flowforge/ml/metrics.hpp"

namespace flowforge::ml {

/// Which label column is predicted.
enum class Target { app, os };

std::string_view to_string(Target target);
/// Throws UsageError for anything but "app" or "os".
Target parse_target(std::string_view text);

/// Plug-in point for additional techniques.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string name() const = 0;
    virtual void fit(const LabelledMatrix& train) = 0;
    virtual std::vector<int> predict(const Matrix& rows) const = 0;
};

class KnnClassifier : public Classifier {
public:
    explicit KnnClassifier(int k) : k_(k) {}
    std::string name() const override;
    void fit(const LabelledMatrix& train) override;
    std::vector<int> predict(const Matrix& rows) const override;

private:
    int k_;
    std::optional<KnnModel> model_;
};

class ForestClassifier : public Classifier {
public:
    explicit ForestClassifier(ForestParams params) : params_(params) {}
    std::string name() const override { return "Random Forest"; }
    void fit(const LabelledMatrix& train) override;
    std::vector<int> predict(const Matrix& rows) const override;
    const ForestModel& model() const;

private:
    ForestParams params_;
    std::optional<ForestModel> model_;
};

/// Rows whose target label is empty or "unknown" are dropped. Labels absent
/// from class_names raise DataError.
LabelledMatrix to_labelled_matrix(const Dataset& dataset, Target target, const std::vector<std::string>& class_names);

struct BenchConfig {
    Target target = Target::app;
    ForestParams forest;
    int knn_k = 1;
};

struct ModelResult {
    std::string technique;
    MetricsReport metrics;
};

struct BenchResult {
    Target target = Target::app;
    std::vector<std::string> class_names;       // sorted union of train and test labels
    std::vector<std::string> test_only_classes;  // cannot be predicted; recall 0
    std::size_t train_rows = 0;
    std::size_t test_rows = 0;
    std::vector<ModelResult> models;  // random forest first
    std::vector<FeatureImportance> importance;
};

/// Fits random forest and KNN on train and scores them on test. Throws
/// DataError when the numerical columns differ, naming them.
BenchResult benchmark(const Dataset& train, const Dataset& test, const BenchConfig& config);

/// "Technique | Macro-Recall | Macro-Precision | Macro-F1" summary.
std::string render_summary(const BenchResult& result);
/// Per-class recall/precision/F1 of one model.
std::string render_per_class(const BenchResult& result, std::size_t model = 0);
std::string render_importance(const BenchResult& result);

std::string metrics_csv(const BenchResult& result);
std::string importance_csv(const BenchResult& result);

}  // namespace flowforge::ml

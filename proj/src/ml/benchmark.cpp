#include "flowforge/ml/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <set>

#include "flowforge/csv.hpp"
#include "flowforge/error.hpp"

namespace flowforge::ml {

std::string_view to_string(Target target) { return target == Target::app ? "app" : "os"; }

Target parse_target(std::string_view text)
{
    if (text == "app") return Target::app;
    if (text == "os") return Target::os;
    throw UsageError("--target must be 'app' or 'os', got '" + std::string(text) + "'");
}

std::string KnnClassifier::name() const { return "KNN (k = " + std::to_string(k_) + ")"; }

void KnnClassifier::fit(const LabelledMatrix& train) { model_ = KnnModel::fit(train, k_); }

std::vector<int> KnnClassifier::predict(const Matrix& rows) const
{
    if (!model_) throw DataError("KNN used before fitting");
    return model_->predict(rows);
}

void ForestClassifier::fit(const LabelledMatrix& train) { model_ = ForestModel::fit(train, params_); }

std::vector<int> ForestClassifier::predict(const Matrix& rows) const { return model().predict(rows); }

const ForestModel& ForestClassifier::model() const
{
    if (!model_) throw DataError("random forest used before fitting");
    return *model_;
}

namespace {

const std::string& target_label(const DatasetRow& row, Target target)
{
    return target == Target::app ? row.app_label : row.os_label;
}

bool usable(const std::string& label) { return !label.empty() && label != kUnknownApp; }

std::string fixed3(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

LabelledMatrix to_labelled_matrix(const Dataset& dataset, Target target, const std::vector<std::string>& class_names)
{
    LabelledMatrix m;
    m.class_names = class_names;
    m.feature_names = dataset.numerical_columns;
    m.rows = Matrix(0, dataset.numerical_columns.size());
    for (const auto& row : dataset.rows) {
        const auto& label = target_label(row, target);
        if (!usable(label)) continue;
        const auto it = std::lower_bound(class_names.begin(), class_names.end(), label);
        if (it == class_names.end() || *it != label) throw DataError("label '" + label + "' is not a known class");
        m.rows.append_row(row.features.numerical);
        m.labels.push_back(static_cast<int>(it - class_names.begin()));
    }
    return m;
}

BenchResult benchmark(const Dataset& train, const Dataset& test, const BenchConfig& config)
{
    if (train.numerical_columns != test.numerical_columns) {
        std::vector<std::string> diff;
        const std::set<std::string> a(train.numerical_columns.begin(), train.numerical_columns.end());
        const std::set<std::string> b(test.numerical_columns.begin(), test.numerical_columns.end());
        std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(diff));
        if (diff.empty()) diff.push_back("(same columns, different order)");
        std::string list;
        for (const auto& d : diff) list += (list.empty() ? "" : ", ") + d;
        throw DataError("train and test schemas differ: " + list);
    }

    std::set<std::string> train_classes, test_classes;
    for (const auto& r : train.rows) {
        if (usable(target_label(r, config.target))) train_classes.insert(target_label(r, config.target));
    }
    for (const auto& r : test.rows) {
        if (usable(target_label(r, config.target))) test_classes.insert(target_label(r, config.target));
    }
    if (train_classes.empty()) throw DataError("training set has no labelled rows");
    if (test_classes.empty()) throw DataError("test set has no labelled rows");

    BenchResult result;
    result.target = config.target;
    std::set<std::string> all = train_classes;
    all.insert(test_classes.begin(), test_classes.end());
    result.class_names.assign(all.begin(), all.end());
    for (const auto& c : test_classes) {
        if (!train_classes.count(c)) result.test_only_classes.push_back(c);
    }

    const auto train_m = to_labelled_matrix(train, config.target, result.class_names);
    const auto test_m = to_labelled_matrix(test, config.target, result.class_names);
    result.train_rows = train_m.size();
    result.test_rows = test_m.size();

    ForestClassifier forest(config.forest);
    KnnClassifier knn(config.knn_k);
    for (Classifier* clf : std::initializer_list<Classifier*>{&forest, &knn}) {
        clf->fit(train_m);
        const auto pred = clf->predict(test_m.rows);
        result.models.push_back({clf->name(), evaluate(pred, test_m.labels, result.class_names)});
    }
    result.importance = forest.model().importance();
    return result;
}

std::string render_summary(const BenchResult& result)
{
    std::string out = pad("Technique", 16) + "| Macro-Recall | Macro-Precision | Macro-F1\n";
    out += std::string(16, '-') + "+--------------+-----------------+---------\n";
    for (const auto& m : result.models) {
        out += pad(m.technique, 16) + "| " + pad(fixed3(m.metrics.macro_recall), 13) + "| " +
               pad(fixed3(m.metrics.macro_precision), 16) + "| " + fixed3(m.metrics.macro_f1) + "\n";
    }
    out += "train rows: " + std::to_string(result.train_rows) + ", test rows: " + std::to_string(result.test_rows) +
           ", classes: " + std::to_string(result.class_names.size()) + "\n";
    for (const auto& c : result.test_only_classes) out += "warning: class '" + c + "' appears only in the test set\n";
    return out;
}

std::string render_per_class(const BenchResult& result, std::size_t model)
{
    const auto& m = result.models.at(model);
    const std::string head = result.target == Target::app ? "Application" : "OS";
    std::string out = m.technique + "\n" + pad(head, 16) + "| Recall | Precision | F1    | Support\n";
    for (const auto& c : m.metrics.per_class) {
        if (c.support == 0 && c.predicted == 0) continue;
        out += pad(c.name, 16) + "| " + pad(fixed3(c.recall), 7) + "| " + pad(fixed3(c.precision), 10) + "| " +
               pad(fixed3(c.f1), 6) + "| " + std::to_string(c.support) + "\n";
    }
    return out;
}

std::string render_importance(const BenchResult& result)
{
    std::string out = "Random forest feature importance\n";
    int rank = 1;
    for (const auto& f : result.importance) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%2d  %-22s %.4f\n", rank++, f.feature.c_str(), f.importance);
        out += buf;
    }
    return out;
}

std::string metrics_csv(const BenchResult& result)
{
    std::string out = csv::format_row({"technique", "class", "recall", "precision", "f1", "support"}) + "\n";
    for (const auto& m : result.models) {
        out += csv::format_row({m.technique, "macro", csv::format_number(m.metrics.macro_recall, 17),
                                csv::format_number(m.metrics.macro_precision, 17),
                                csv::format_number(m.metrics.macro_f1, 17), std::to_string(result.test_rows)}) +
               "\n";
        for (const auto& c : m.metrics.per_class) {
            out += csv::format_row({m.technique, c.name, csv::format_number(c.recall, 17),
                                    csv::format_number(c.precision, 17), csv::format_number(c.f1, 17),
                                    std::to_string(c.support)}) +
                   "\n";
        }
    }
    return out;
}

std::string importance_csv(const BenchResult& result)
{
    std::string out = "rank,feature,importance\n";
    int rank = 1;
    for (const auto& f : result.importance) {
        out += csv::format_row({std::to_string(rank++), f.feature, csv::format_number(f.importance, 17)}) + "\n";
    }
    return out;
}

}  // namespace flowforge::ml

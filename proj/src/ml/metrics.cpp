#include "flowforge/ml/metrics.hpp"

#include "flowforge/error.hpp"

namespace flowforge::ml {

MetricsReport evaluate(std::span<const int> pred, std::span<const int> truth,
                       const std::vector<std::string>& class_names)
{
    if (pred.size() != truth.size()) {
        throw DataError("prediction and truth lengths differ (" + std::to_string(pred.size()) + " vs " +
                        std::to_string(truth.size()) + ")");
    }
    if (truth.empty()) throw DataError("nothing to evaluate");
    const int k = static_cast<int>(class_names.size());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= k) throw DataError("unknown class id " + std::to_string(pred[i]) + " in predictions");
        if (truth[i] < 0 || truth[i] >= k) throw DataError("unknown class id " + std::to_string(truth[i]) + " in truth");
    }

    MetricsReport r;
    r.class_names = class_names;
    r.confusion.assign(k, std::vector<std::int64_t>(k, 0));
    for (std::size_t i = 0; i < pred.size(); ++i) ++r.confusion[truth[i]][pred[i]];

    double sum_r = 0.0, sum_p = 0.0, sum_f = 0.0;
    for (int c = 0; c < k; ++c) {
        ClassMetrics m;
        m.name = class_names[c];
        for (int j = 0; j < k; ++j) {
            m.support += r.confusion[c][j];
            m.predicted += r.confusion[j][c];
        }
        const auto tp = static_cast<double>(r.confusion[c][c]);
        m.recall = m.support > 0 ? tp / static_cast<double>(m.support) : 0.0;
        m.precision = m.predicted > 0 ? tp / static_cast<double>(m.predicted) : 0.0;
        m.f1 = m.recall + m.precision > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        if (m.support > 0) {
            sum_r += m.recall;
            sum_p += m.precision;
            sum_f += m.f1;
            ++r.classes_with_support;
        }
        r.per_class.push_back(std::move(m));
    }
    const double n = r.classes_with_support;
    r.macro_recall = sum_r / n;
    r.macro_precision = sum_p / n;
    r.macro_f1 = sum_f / n;
    return r;
}

}  // namespace flowforge::ml

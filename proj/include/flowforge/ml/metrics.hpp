#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace flowforge::ml {

struct ClassMetrics {
    std::string name;
    std::int64_t support = 0;    // true instances
    std::int64_t predicted = 0;  // predicted instances
    double recall = 0.0;
    double precision = 0.0;  // 0 when nothing was predicted as this class
    double f1 = 0.0;
};

struct MetricsReport {
    std::vector<std::string> class_names;
    std::vector<std::vector<std::int64_t>> confusion;  // [truth][pred]
    std::vector<ClassMetrics> per_class;
    // Unweighted means over classes with nonzero support.
    double macro_recall = 0.0;
    double macro_precision = 0.0;
    double macro_f1 = 0.0;
    int classes_with_support = 0;
};

/// Throws DataError on length mismatch, empty input or out-of-range ids.
MetricsReport evaluate(std::span<const int> pred, std::span<const int> truth,
                       const std::vector<std::string>& class_names);

}  // namespace flowforge::ml

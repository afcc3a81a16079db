#pragma once

#include <string>
#include <vector>

#include "flowforge/matrix.hpp"

namespace flowforge::ml {

/// Numerical rows with dense class ids 0..K-1.
struct LabelledMatrix {
    Matrix rows;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;

    std::size_t size() const { return labels.size(); }
    int class_count() const { return static_cast<int>(class_names.size()); }

    /// Throws DataError when lengths disagree or a label is out of range.
    void check() const;
};

}  // namespace flowforge::ml

#include "flowforge/ml/labelled_matrix.hpp"

#include "flowforge/error.hpp"

namespace flowforge::ml {

void LabelledMatrix::check() const
{
    if (rows.rows() != labels.size()) {
        throw DataError("matrix has " + std::to_string(rows.rows()) + " rows but " + std::to_string(labels.size()) +
                        " labels");
    }
    if (!feature_names.empty() && rows.rows() > 0 && feature_names.size() != rows.cols()) {
        throw DataError("matrix has " + std::to_string(rows.cols()) + " columns but " +
                        std::to_string(feature_names.size()) + " feature names");
    }
    for (int label : labels) {
        if (label < 0 || label >= class_count()) throw DataError("class id " + std::to_string(label) + " out of range");
    }
}

}  // namespace flowforge::ml

#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "flowforge/features.hpp"
#include "flowforge/labeller.hpp"

namespace flowforge {

struct DatasetRow {
    FeatureVector features;
    std::string app_label;
    std::string os_label;
    std::string device_id;
    std::string label_confidence;

    bool operator==(const DatasetRow&) const = default;
};

/// Labelled flows in the flat tabular form used on disk.
struct Dataset {
    std::vector<std::string> numerical_columns;  // schema order
    std::vector<DatasetRow> rows;

    bool operator==(const Dataset&) const = default;
};

inline constexpr std::size_t kDatasetColumnCount = kFeatureCount + 4;

/// 36 feature columns followed by app_label, os_label, device_id, label_confidence.
std::vector<std::string> dataset_header();

Dataset to_dataset(std::span<const LabelledFlow> flows);

std::string format_dataset_csv(const Dataset& dataset);
/// Numbers are written with 9 significant digits.
void export_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Maps foreign column names onto schema names.
using AliasTable = std::map<std::string, std::string>;

/// CSV with header "alias,canonical". Throws ConfigError when a canonical
/// name is not a dataset column.
AliasTable load_alias_table(const std::filesystem::path& path);

struct ImportResult {
    Dataset dataset;
    std::vector<std::string> warnings;  // ignored or defaulted columns
};

/// Columns are matched by name after alias mapping. Missing numerical
/// columns raise DataError listing all of them; missing categorical and
/// label columns default to empty strings; unknown columns are ignored.
/// Both cases are reported in warnings.
ImportResult parse_dataset_csv(std::string_view text, const AliasTable& aliases = {});
ImportResult import_csv(const std::filesystem::path& path, const AliasTable& aliases = {});

}  // namespace flowforge

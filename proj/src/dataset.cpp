#include "flowforge/dataset.hpp"

#include <set>

#include "flowforge/csv.hpp"
#include "flowforge/error.hpp"
#include "flowforge/fileio.hpp"

namespace flowforge {

namespace {

const std::array<std::string_view, 4> kLabelColumns = {"app_label", "os_label", "device_id", "label_confidence"};

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

std::vector<std::string> canonical_numerical_columns()
{
    const auto& names = numerical_feature_names();
    return {names.begin(), names.end()};
}

}  // namespace

std::vector<std::string> dataset_header()
{
    std::vector<std::string> h;
    for (auto n : numerical_feature_names()) h.emplace_back(n);
    for (auto n : categorical_feature_names()) h.emplace_back(n);
    for (auto n : kLabelColumns) h.emplace_back(n);
    return h;
}

Dataset to_dataset(std::span<const LabelledFlow> flows)
{
    Dataset ds;
    ds.numerical_columns = canonical_numerical_columns();
    for (const auto& f : flows) {
        ds.rows.push_back({f.features, f.app_label, std::string(to_string(f.os_label)), f.device_id,
                           std::string(to_string(f.label_confidence))});
    }
    return ds;
}

std::string format_dataset_csv(const Dataset& dataset)
{
    std::string out = csv::format_row(dataset_header()) + "\n";
    csv::Row row;
    for (const auto& r : dataset.rows) {
        row.clear();
        for (double v : r.features.numerical) row.push_back(csv::format_number(v, 9));
        for (const auto& c : r.features.categorical) row.push_back(c);
        row.push_back(r.app_label);
        row.push_back(r.os_label);
        row.push_back(r.device_id);
        row.push_back(r.label_confidence);
        out += csv::format_row(row) + "\n";
    }
    return out;
}

void export_csv(const Dataset& dataset, const std::filesystem::path& path)
{
    write_text_file(path, format_dataset_csv(dataset));
}

AliasTable load_alias_table(const std::filesystem::path& path)
{
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows.front() != csv::Row{"alias", "canonical"}) {
        throw ConfigError("alias table '" + path.string() + "' must start with header alias,canonical");
    }
    const auto header = dataset_header();
    const std::set<std::string> known(header.begin(), header.end());
    AliasTable table;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() == 1 && r[0].empty()) continue;
        if (r.size() != 2) throw ConfigError("alias table line " + std::to_string(i + 1) + ": expected 2 fields");
        if (!known.count(r[1])) {
            throw ConfigError("alias table line " + std::to_string(i + 1) + ": unknown column '" + r[1] + "'");
        }
        table[r[0]] = r[1];
    }
    return table;
}

ImportResult parse_dataset_csv(std::string_view text, const AliasTable& aliases)
{
    const auto rows = csv::parse(text);
    if (rows.empty()) throw FormatError("dataset has no header");

    std::map<std::string, std::size_t> position;
    std::vector<std::string> ignored;
    const auto header = dataset_header();
    const std::set<std::string> known(header.begin(), header.end());
    for (std::size_t i = 0; i < rows.front().size(); ++i) {
        std::string name = rows.front()[i];
        if (const auto it = aliases.find(name); it != aliases.end()) name = it->second;
        if (!known.count(name)) {
            ignored.push_back(rows.front()[i]);
            continue;
        }
        if (!position.emplace(name, i).second) throw FormatError("duplicate column '" + name + "'");
    }

    std::vector<std::string> missing_num, missing_other;
    for (auto n : numerical_feature_names()) {
        if (!position.count(std::string(n))) missing_num.emplace_back(n);
    }
    if (!missing_num.empty()) throw DataError("missing numerical columns: " + join(missing_num));
    for (std::size_t i = kNumericalCount; i < header.size(); ++i) {
        if (!position.count(header[i])) missing_other.push_back(header[i]);
    }

    ImportResult result;
    if (!ignored.empty()) result.warnings.push_back("ignoring unknown columns: " + join(ignored));
    if (!missing_other.empty()) result.warnings.push_back("columns absent, left empty: " + join(missing_other));
    result.dataset.numerical_columns = canonical_numerical_columns();

    auto cell = [&](const csv::Row& r, const std::string& name) -> std::string {
        const auto it = position.find(name);
        return it == position.end() ? std::string{} : r[it->second];
    };
    const std::size_t width = rows.front().size();
    for (std::size_t li = 1; li < rows.size(); ++li) {
        const auto& r = rows[li];
        if (r.size() == 1 && r[0].empty()) continue;
        if (r.size() != width) {
            throw FormatError("line " + std::to_string(li + 1) + ": expected " + std::to_string(width) + " fields, got " +
                              std::to_string(r.size()));
        }
        DatasetRow row;
        for (std::size_t j = 0; j < kNumericalCount; ++j) {
            const std::string& name = header[j];
            const std::string& text_value = r[position.at(name)];
            if (!csv::parse_number(text_value, row.features.numerical[j])) {
                throw DataError("row " + std::to_string(li) + ", column '" + name + "': '" + text_value +
                                "' is not a finite number");
            }
        }
        for (std::size_t j = 0; j < kCategoricalCount; ++j) row.features.categorical[j] = cell(r, header[kNumericalCount + j]);
        row.app_label = cell(r, "app_label");
        row.os_label = cell(r, "os_label");
        row.device_id = cell(r, "device_id");
        row.label_confidence = cell(r, "label_confidence");
        result.dataset.rows.push_back(std::move(row));
    }
    return result;
}

ImportResult import_csv(const std::filesystem::path& path, const AliasTable& aliases)
{
    try {
        return parse_dataset_csv(read_text_file(path), aliases);
    } catch (const DataError& e) {
        throw DataError("'" + path.string() + "': " + e.what());
    } catch (const FormatError& e) {
        throw FormatError("'" + path.string() + "': " + e.what());
    }
}

}  // namespace flowforge

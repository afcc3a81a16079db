#include "flowforge/reliability.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "flowforge/csv.hpp"
#include "flowforge/error.hpp"
#include "flowforge/fileio.hpp"

namespace flowforge {

std::string_view to_string(Outcome outcome)
{
    switch (outcome) {
    case Outcome::success: return "success";
    case Outcome::launch_failure: return "launch_failure";
    case Outcome::execution_failure: return "execution_failure";
    }
    return "success";
}

Outcome parse_outcome(std::string_view text)
{
    if (text == "success") return Outcome::success;
    if (text == "launch_failure") return Outcome::launch_failure;
    if (text == "execution_failure") return Outcome::execution_failure;
    throw FormatError("unknown outcome '" + std::string(text) + "'");
}

EfDenominator parse_ef_denominator(std::string_view text)
{
    if (text == "all") return EfDenominator::all;
    if (text == "launched") return EfDenominator::launched;
    throw UsageError("--ef-denominator must be 'all' or 'launched', got '" + std::string(text) + "'");
}

ReportFormat parse_report_format(std::string_view text)
{
    if (text == "table") return ReportFormat::table;
    if (text == "csv") return ReportFormat::csv;
    throw UsageError("unknown report format '" + std::string(text) + "' (expected table or csv)");
}

namespace {

struct Counts {
    std::int64_t attempts = 0;
    std::int64_t successes = 0;
    std::int64_t lf = 0;
    std::int64_t ef = 0;

    void add(Outcome o)
    {
        ++attempts;
        if (o == Outcome::success) ++successes;
        if (o == Outcome::launch_failure) ++lf;
        if (o == Outcome::execution_failure) ++ef;
    }
};

ReliabilityRow make_row(std::string device, std::string app, const Counts& c, EfDenominator denom)
{
    ReliabilityRow row{std::move(device), std::move(app), c.attempts, c.successes, c.lf, c.ef};
    const std::int64_t ef_base = denom == EfDenominator::all ? c.attempts : c.attempts - c.lf;
    if (c.attempts > 0) {
        row.lf_pct = 100.0 * static_cast<double>(c.lf) / static_cast<double>(c.attempts);
    } else {
        row.zero_attempts = true;
    }
    if (ef_base > 0) {
        row.ef_pct = 100.0 * static_cast<double>(c.ef) / static_cast<double>(ef_base);
    } else {
        row.zero_attempts = true;
    }
    return row;
}

std::string pad(std::string s, std::size_t width)
{
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

}  // namespace

ReliabilityReport compute_reliability(std::span<const ActionRecord> run_log, EfDenominator ef_denominator)
{
    std::map<std::pair<std::string, std::string>, Counts> pair_counts;
    std::map<std::string, Counts> device_counts;
    std::map<std::string, Counts> app_counts;
    for (const auto& rec : run_log) {
        if (rec.background) continue;
        pair_counts[{rec.device_id, rec.app_name}].add(rec.outcome);
        device_counts[rec.device_id].add(rec.outcome);
        app_counts[rec.app_name].add(rec.outcome);
    }

    ReliabilityReport report;
    report.ef_denominator = ef_denominator;
    for (const auto& [k, c] : pair_counts) report.by_device_app.push_back(make_row(k.first, k.second, c, ef_denominator));
    for (const auto& [d, c] : device_counts) report.by_device.push_back(make_row(d, "", c, ef_denominator));
    for (const auto& [a, c] : app_counts) report.by_app.push_back(make_row("", a, c, ef_denominator));
    return report;
}

std::string format_pct_device(double pct)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", pct);
    return buf;
}

std::string format_pct_app(double pct)
{
    if (pct == 0.0) return "0";
    int decimals = std::max(0, 1 - static_cast<int>(std::floor(std::log10(pct))));
    const double scale = std::pow(10.0, decimals);
    const double rounded = std::round(pct * scale) / scale;
    // Rounding can carry into the next decade (9.96 -> 10).
    decimals = std::max(0, 1 - static_cast<int>(std::floor(std::log10(rounded))));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, rounded);
    return buf;
}

std::string render_reliability(const ReliabilityReport& report, ReportFormat format)
{
    std::string out;
    if (format == ReportFormat::csv) {
        out = csv::format_row({"level", "device", "application", "ef_pct", "lf_pct", "attempts", "ef_count",
                               "lf_count", "zero_attempts"}) +
              "\n";
        auto emit = [&](std::string_view level, const std::vector<ReliabilityRow>& rows) {
            for (const auto& r : rows) {
                out += csv::format_row({std::string(level), r.device_id, r.app_name, csv::format_number(r.ef_pct, 17),
                                        csv::format_number(r.lf_pct, 17), std::to_string(r.attempts),
                                        std::to_string(r.ef_count), std::to_string(r.lf_count),
                                        r.zero_attempts ? "1" : "0"}) +
                       "\n";
            }
        };
        emit("device", report.by_device);
        emit("application", report.by_app);
        emit("device_application", report.by_device_app);
        return out;
    }

    out += "Reliability by device\n";
    out += pad("Device", 14) + pad("EF %", 10) + pad("LF %", 10) + "Attempts\n";
    for (const auto& r : report.by_device) {
        out += pad(r.device_id, 14) + pad(format_pct_device(r.ef_pct), 10) + pad(format_pct_device(r.lf_pct), 10) +
               std::to_string(r.attempts) + "\n";
    }
    out += "\nReliability by application\n";
    out += pad("Application", 14) + pad("EF %", 10) + pad("LF %", 10) + "Attempts\n";
    for (const auto& r : report.by_app) {
        out += pad(r.app_name, 14) + pad(format_pct_app(r.ef_pct), 10) + pad(format_pct_app(r.lf_pct), 10) +
               std::to_string(r.attempts) + "\n";
    }
    out += "\nReliability by device and application\n";
    out += pad("Device", 14) + pad("Application", 14) + pad("EF %", 10) + pad("LF %", 10) + "Attempts\n";
    for (const auto& r : report.by_device_app) {
        out += pad(r.device_id, 14) + pad(r.app_name, 14) + pad(format_pct_app(r.ef_pct), 10) +
               pad(format_pct_app(r.lf_pct), 10) + std::to_string(r.attempts) + "\n";
    }
    if (report.ef_denominator == EfDenominator::launched) {
        out += "\n(EF % is relative to launched attempts)\n";
    }
    return out;
}

std::string action_record_to_json_line(const ActionRecord& rec)
{
    nlohmann::ordered_json j;
    j["ts_us"] = rec.ts_us;
    j["device_id"] = rec.device_id;
    j["app"] = rec.app_name;
    j["action"] = rec.action_name;
    j["outcome"] = to_string(rec.outcome);
    return j.dump();
}

ActionRecord action_record_from_json_line(std::string_view line)
{
    try {
        const auto j = nlohmann::json::parse(line);
        ActionRecord rec;
        rec.ts_us = j.at("ts_us").get<std::int64_t>();
        rec.device_id = j.at("device_id").get<std::string>();
        rec.app_name = j.at("app").get<std::string>();
        rec.action_name = j.at("action").get<std::string>();
        rec.outcome = parse_outcome(j.at("outcome").get<std::string>());
        return rec;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("run log: ") + e.what());
    }
}

void write_run_log(std::span<const ActionRecord> records, const std::filesystem::path& path)
{
    std::string text;
    for (const auto& rec : records) {
        if (!rec.background) text += action_record_to_json_line(rec) + "\n";
    }
    write_text_file(path, text);
}

std::vector<ActionRecord> read_run_log(const std::filesystem::path& path)
{
    std::vector<ActionRecord> out;
    std::size_t line_no = 0;
    for (const auto& line : nonblank_lines(read_text_file(path))) {
        ++line_no;
        try {
            out.push_back(action_record_from_json_line(line));
        } catch (const FormatError& e) {
            throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace flowforge

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flowforge {

enum class Outcome { success, launch_failure, execution_failure };

std::string_view to_string(Outcome outcome);
Outcome parse_outcome(std::string_view text);

/// One automation action. Only ts_us, device_id, app_name, action_name and
/// outcome are persisted in run logs; the rest is simulator bookkeeping.
struct ActionRecord {
    std::int64_t ts_us = 0;
    std::string device_id;
    std::string app_name;
    std::string action_name;
    Outcome outcome = Outcome::success;

    std::int64_t duration_us = 0;
    int total_steps = 0;
    int steps_executed = 0;  // 0 for launch failures
    bool background = false;

    bool operator==(const ActionRecord&) const = default;
};

/// Which attempts divide the execution-failure count.
enum class EfDenominator {
    all,       // every attempt
    launched,  // attempts that did not fail to launch
};

EfDenominator parse_ef_denominator(std::string_view text);

struct ReliabilityRow {
    std::string device_id;  // empty in per-app rows
    std::string app_name;   // empty in per-device rows
    std::int64_t attempts = 0;
    std::int64_t successes = 0;
    std::int64_t lf_count = 0;
    std::int64_t ef_count = 0;
    double lf_pct = 0.0;
    double ef_pct = 0.0;
    // Set when a percentage had a zero denominator and was reported as 0.
    bool zero_attempts = false;
};

struct ReliabilityReport {
    std::vector<ReliabilityRow> by_device_app;  // sorted by (device, app)
    std::vector<ReliabilityRow> by_device;
    std::vector<ReliabilityRow> by_app;
    EfDenominator ef_denominator = EfDenominator::all;

    bool empty() const { return by_device_app.empty(); }
};

/// Background records are ignored; they are not automation attempts.
ReliabilityReport compute_reliability(std::span<const ActionRecord> run_log,
                                      EfDenominator ef_denominator = EfDenominator::all);

enum class ReportFormat { table, csv };

/// Throws UsageError for anything but "table" or "csv".
ReportFormat parse_report_format(std::string_view text);

/// Device rows use three decimals; application rows two significant figures.
std::string render_reliability(const ReliabilityReport& report, ReportFormat format);

/// Percentage text for the device table, e.g. 1.020.
std::string format_pct_device(double pct);
/// Percentage text for application tables, e.g. 1.3, 14, 0.28.
std::string format_pct_app(double pct);

std::string action_record_to_json_line(const ActionRecord& rec);
ActionRecord action_record_from_json_line(std::string_view line);

/// Writes foreground records only.
void write_run_log(std::span<const ActionRecord> records, const std::filesystem::path& path);
std::vector<ActionRecord> read_run_log(const std::filesystem::path& path);

}  // namespace flowforge

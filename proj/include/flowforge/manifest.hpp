#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flowforge {

/// Everything needed to re-run a command.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_hash;  // 16 hex digits
    std::string tool_version;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::string started_at;  // UTC, ISO 8601
    std::string finished_at;
};

std::string utc_timestamp_now();
std::string hex64(std::uint64_t value);

std::string manifest_to_json(const RunManifest& manifest);
/// Written atomically.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace flowforge

#include "flowforge/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "flowforge/fileio.hpp"

namespace flowforge {

std::string utc_timestamp_now()
{
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string manifest_to_json(const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["seed"] = m.seed ? nlohmann::ordered_json(*m.seed) : nlohmann::ordered_json(nullptr);
    j["config_hash"] = m.config_hash ? nlohmann::ordered_json(*m.config_hash) : nlohmann::ordered_json(nullptr);
    j["tool_version"] = m.tool_version;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["started_at"] = m.started_at;
    j["finished_at"] = m.finished_at;
    return j.dump(2) + "\n";
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path)
{
    write_text_file_atomic(path, manifest_to_json(manifest));
}

}  // namespace flowforge

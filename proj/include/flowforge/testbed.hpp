#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforge/labeller.hpp"
#include "flowforge/net.hpp"
#include "flowforge/packet.hpp"
#include "flowforge/reliability.hpp"

namespace flowforge::testbed {

/// Closed interval [min, max] sampled uniformly.
struct UniformReal {
    double min = 0.0;
    double max = 0.0;
    bool operator==(const UniformReal&) const = default;
};

struct UniformInt {
    std::int64_t min = 0;
    std::int64_t max = 0;
    bool operator==(const UniformInt&) const = default;
};

enum class BurstDirection { up, down };

/// A run of packets in one direction on the action's socket.
struct TrafficBurst {
    BurstDirection direction = BurstDirection::up;
    UniformInt pkt_count{1, 1};
    UniformInt pkt_len{40, 1500};  // IPv4 total length
    UniformInt inter_pkt_gap_us{1000, 1000};
    UniformInt lead_gap_us{0, 0};  // idle time before the burst starts
    std::uint16_t tcp_window_base = 65535;

    bool operator==(const TrafficBurst&) const = default;
};

struct ActionModel {
    std::string action_name;
    double weight = 1.0;  // normalized across a device's installed apps
    std::vector<TrafficBurst> steps;
    UniformReal duration_s{10.0, 10.0};

    bool operator==(const ActionModel&) const = default;
};

struct Endpoint {
    Ipv4Address ip;
    std::uint16_t port = 443;
    bool operator==(const Endpoint&) const = default;
};

struct AppModel {
    std::string app_name;
    std::vector<Os> os_availability;
    std::vector<ActionModel> actions;
    std::vector<Endpoint> server_endpoints;
    std::uint8_t protocol = kProtoTcp;
    std::optional<double> background_poll_period_s;
    std::vector<TrafficBurst> background_poll;  // traffic of one poll
    std::string ios_process;                     // owner name on iOS devices

    bool operator==(const AppModel&) const = default;
};

struct DeviceProfile {
    std::string device_id;
    std::string model;
    Os os = Os::android;
    std::string os_version;
    Ipv4Address local_ip;
    MacAddress mac;
    std::vector<std::string> installed_apps;
    std::uint8_t ttl_default = 64;

    bool operator==(const DeviceProfile&) const = default;
};

struct FailureRate {
    std::string device_id;
    std::string app_name;
    double lf_prob = 0.0;
    double ef_prob = 0.0;
    bool operator==(const FailureRate&) const = default;
};

struct ScenarioConfig {
    double duration_s = 1800.0;
    std::vector<DeviceProfile> devices;
    std::vector<AppModel> apps;
    Cidr subnet;
    std::uint64_t seed = 0;
    std::vector<FailureRate> failure_rates;

    std::int64_t start_ts_us = 1'577'836'800'000'000;  // 2020-01-01T00:00:00Z
    UniformReal idle_s{5.0, 60.0};                    // between foreground actions
    UniformInt handshake_rtt_us{10'000, 80'000};
    UniformInt remote_ttl{50, 58};
    MacAddress gateway_mac;
    double port_reuse_prob = 0.1;
    double port_reuse_min_gap_s = 120.0;
    double socket_poll_interval_s = 30.0;  // cadence of "poll" socket events
    double max_intra_episode_gap_s = 30.0;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError naming the first inconsistency.
void validate(const ScenarioConfig& config);

/// Five-device, fifteen-app testbed with invented traffic templates.
ScenarioConfig default_scenario();

std::string to_json_text(const ScenarioConfig& config);
ScenarioConfig from_json_text(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

/// Deterministic 64-bit FNV-1a of the config's JSON form.
std::uint64_t config_hash(const ScenarioConfig& config);

const AppModel* find_app(const ScenarioConfig& config, std::string_view app_name);
const DeviceProfile* find_device(const ScenarioConfig& config, std::string_view device_id);

/// Owner identity reported in socket events: a UID on Android, a process
/// name on iOS.
SocketOwner owner_for(const ScenarioConfig& config, const DeviceProfile& device, const AppModel& app);

UidMap build_uid_map(const ScenarioConfig& config);
DeviceMap build_device_map(const ScenarioConfig& config);

/// Per device: foreground actions serialized back to back with idle gaps,
/// drawn by normalized action weight across installed apps. Background poll
/// records (background = true) are interleaved for apps with a poll period,
/// starting after that app's first foreground action. Sorted by (ts, device).
std::vector<ActionRecord> schedule_actions(const ScenarioConfig& config);

/// Launch failure with probability lf, else execution failure with
/// probability ef (truncating at a uniformly drawn step), else success.
/// Background records are passed through untouched.
std::vector<ActionRecord> inject_failures(std::span<const ActionRecord> schedule,
                                          std::span<const FailureRate> failure_rates, std::uint64_t seed);

struct ScenarioOutput {
    std::vector<PacketRecord> packets;      // sorted by timestamp
    std::vector<SocketEvent> socket_events;  // sorted by timestamp
    std::vector<ActionRecord> run_log;       // foreground actions only
    std::vector<GroundTruth> truth;          // one entry per socket episode
};

ScenarioOutput run_scenario(const ScenarioConfig& config);

}  // namespace flowforge::testbed

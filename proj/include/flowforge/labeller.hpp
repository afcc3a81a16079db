#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "flowforge/features.hpp"
#include "flowforge/flow.hpp"
#include "flowforge/net.hpp"

namespace flowforge {

enum class Os { android, ios };

std::string_view to_string(Os os);
/// Accepts "Android"/"iOS" in any letter case.
Os parse_os(std::string_view text);

enum class SocketEventKind { open, poll, close };

std::string_view to_string(SocketEventKind kind);
SocketEventKind parse_socket_event_kind(std::string_view text);

/// Android sockets are owned by a UID, iOS sockets by a process name.
using SocketOwner = std::variant<std::int64_t, std::string>;

std::string owner_to_string(const SocketOwner& owner);

/// Device-side observation binding a 5-tuple to its owning application.
struct SocketEvent {
    std::int64_t ts_us = 0;
    std::string device_id;
    SocketEventKind event = SocketEventKind::open;
    std::uint8_t protocol = 0;
    Ipv4Address src_ip;
    std::uint16_t src_port = 0;
    Ipv4Address dst_ip;
    std::uint16_t dst_port = 0;
    SocketOwner owner;

    bool operator==(const SocketEvent&) const = default;
};

/// (device_id, owner) -> application name; the dumpsys analogue.
class UidMap {
public:
    void add(const std::string& device_id, const std::string& owner, const std::string& app_name);
    const std::string* find(const std::string& device_id, const std::string& owner) const;
    const std::map<std::pair<std::string, std::string>, std::string>& entries() const { return entries_; }

    bool operator==(const UidMap&) const = default;

private:
    std::map<std::pair<std::string, std::string>, std::string> entries_;
};

struct DeviceInfo {
    std::string device_id;
    Os os = Os::android;
    std::string os_version;

    bool operator==(const DeviceInfo&) const = default;
};

using DeviceMap = std::map<Ipv4Address, DeviceInfo>;

enum class LabelConfidence { exact, nearest_in_time, unlabelled };

std::string_view to_string(LabelConfidence c);
LabelConfidence parse_label_confidence(std::string_view text);

inline constexpr std::string_view kUnknownApp = "unknown";

struct LabelledFlow {
    FeatureVector features;
    std::string app_label;
    Os os_label = Os::android;
    std::string device_id;
    LabelConfidence label_confidence = LabelConfidence::unlabelled;
    // Provenance for validation; not part of the dataset file.
    FlowKey key;
    int epoch = 0;
    std::int64_t first_ts_us = 0;
    std::int64_t last_ts_us = 0;
};

struct LabelOptions {
    // Socket intervals are widened by this much on both sides.
    double grace_s = 2.0;
    // A flow that overlaps no widened interval may still take the label of
    // the closest same-5-tuple interval within this distance.
    double nearest_max_gap_s = 60.0;
};

/// Matches every non-foreign flow to the socket intervals of its device with
/// the same canonical 5-tuple. The interval with maximal overlap wins (ties
/// to the earlier open). Confidence is exact when the flow lies inside the
/// widened interval, nearest_in_time for partial overlap or a near miss, and
/// unlabelled (app "unknown") otherwise. Foreign flows are dropped.
/// Throws DataError for owners missing from uid_map and for local IPs
/// missing from device_map.
std::vector<LabelledFlow> label_flows(std::span<const Flow> flows, std::span<const SocketEvent> events,
                                      const UidMap& uid_map, const DeviceMap& device_map,
                                      const LabelOptions& options = {});

/// Simulator-side record of one socket episode; the oracle for labelling.
struct GroundTruth {
    FlowKey key;
    int episode = 0;  // nth use of this key in the scenario
    std::int64_t first_ts_us = 0;
    std::int64_t last_ts_us = 0;
    std::string app_name;
    Os os = Os::android;
    std::string device_id;

    bool operator==(const GroundTruth&) const = default;
};

struct LabelMismatch {
    FlowKey key;
    int epoch = 0;
    std::string expected;
    std::string actual;
};

struct LabelAccuracy {
    double fraction = 1.0;
    std::size_t correct = 0;
    std::size_t total = 0;
    std::vector<LabelMismatch> mismatches;
};

/// Each labelled flow is compared with the truth entry of the same key that
/// overlaps it most. Unknown labels and flows without truth count as wrong.
/// An empty input scores 1.0.
LabelAccuracy label_accuracy(std::span<const LabelledFlow> labelled, std::span<const GroundTruth> truth);

// File formats.
void write_socket_events(std::span<const SocketEvent> events, const std::filesystem::path& path);
std::vector<SocketEvent> read_socket_events(const std::filesystem::path& path);
std::string socket_event_to_json_line(const SocketEvent& ev);
SocketEvent socket_event_from_json_line(std::string_view line);

void write_uid_map(const UidMap& map, const std::filesystem::path& path);
UidMap read_uid_map(const std::filesystem::path& path);

void write_device_map(const DeviceMap& map, const std::filesystem::path& path);
DeviceMap read_device_map(const std::filesystem::path& path);

void write_truth(std::span<const GroundTruth> truth, const std::filesystem::path& path);
std::vector<GroundTruth> read_truth(const std::filesystem::path& path);

}  // namespace flowforge

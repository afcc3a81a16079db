#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flowforge/flow.hpp"
#include "flowforge/matrix.hpp"
#include "flowforge/packet.hpp"

namespace flowforge {

/// Per-direction summary of one flow. Packet lengths are IPv4 total lengths.
struct DirStats {
    std::int64_t pkt_count = 0;
    std::int64_t byte_count = 0;
    double pkt_len_min = 0.0;
    double pkt_len_max = 0.0;
    double pkt_len_mean = 0.0;
    double pkt_len_std = 0.0;  // population standard deviation
    double iat_mean_s = 0.0;
    std::int64_t tcp_init_win = 0;
    std::int64_t ttl_mode = 0;  // ties resolve to the smaller TTL

    bool operator==(const DirStats&) const = default;
};

/// Packets must be in time order. An empty span yields all-zero stats.
DirStats summarize_direction(std::span<const PacketRecord> packets);

inline constexpr std::size_t kNumericalCount = 20;
inline constexpr std::size_t kCategoricalCount = 16;
inline constexpr std::size_t kFeatureCount = kNumericalCount + kCategoricalCount;
inline constexpr int kSchemaVersion = 1;

/// Column positions of the numerical block (schema v1).
enum class Num : std::size_t {
    duration_s,
    local_pkt_count,
    local_byte_count,
    local_pkt_len_min,
    local_pkt_len_max,
    local_pkt_len_mean,
    local_pkt_len_std,
    local_iat_mean_s,
    local_tcp_init_win,
    local_ttl_mode,
    remote_pkt_count,
    remote_byte_count,
    remote_pkt_len_min,
    remote_pkt_len_max,
    remote_pkt_len_mean,
    remote_pkt_len_std,
    remote_iat_mean_s,
    remote_tcp_init_win,
    remote_ttl_mode,
    byte_ratio,
};

/// Column positions of the categorical block (schema v1).
enum class Cat : std::size_t {
    protocol,
    local_ip,
    remote_ip,
    local_port,
    remote_port,
    local_mac,
    remote_mac,
    local_tcp_flags,
    remote_tcp_flags,
    local_tcp_options,
    remote_tcp_options,
    first_pkt_direction,
    vlan_id,
    local_dscp,
    remote_dscp,
    l4_service,
};

const std::array<std::string_view, kNumericalCount>& numerical_feature_names();
const std::array<std::string_view, kCategoricalCount>& categorical_feature_names();

/// Offset of the first DirStats field for a side, e.g. Num::local_pkt_count.
constexpr std::size_t dir_block_start(Side side)
{
    return side == Side::local ? static_cast<std::size_t>(Num::local_pkt_count)
                               : static_cast<std::size_t>(Num::remote_pkt_count);
}
inline constexpr std::size_t kDirStatsFields = 9;

struct FeatureVector {
    std::array<double, kNumericalCount> numerical{};
    std::array<std::string, kCategoricalCount> categorical{};

    double operator[](Num f) const { return numerical[static_cast<std::size_t>(f)]; }
    double& operator[](Num f) { return numerical[static_cast<std::size_t>(f)]; }
    const std::string& operator[](Cat f) const { return categorical[static_cast<std::size_t>(f)]; }
    std::string& operator[](Cat f) { return categorical[static_cast<std::size_t>(f)]; }

    bool operator==(const FeatureVector&) const = default;
};

/// Throws DataError on an empty flow.
FeatureVector extract_features(const Flow& flow);

/// IANA service name for well-known ports we recognise; "unregistered" otherwise.
std::string_view l4_service_guess(std::uint16_t port_x, std::uint16_t port_y);

struct NumericalMatrix {
    Matrix values;
    std::vector<std::string> column_names;
};

/// Rows follow dataset order; columns follow numerical_feature_names().
NumericalMatrix numerical_matrix(std::span<const FeatureVector> dataset);

}  // namespace flowforge

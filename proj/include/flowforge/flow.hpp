#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "flowforge/net.hpp"
#include "flowforge/packet.hpp"

namespace flowforge {

/// Bidirectional 5-tuple with the lexicographically smaller (ip, port)
/// endpoint stored first.
struct FlowKey {
    Ipv4Address ip_a;
    std::uint16_t port_a = 0;
    Ipv4Address ip_b;
    std::uint16_t port_b = 0;
    std::uint8_t protocol = 0;

    std::string to_string() const;
    auto operator<=>(const FlowKey&) const = default;
};

/// Orientation of a packet relative to its canonical key.
enum class KeyDirection { a_to_b, b_to_a };

/// Equal-endpoint packets resolve to a_to_b.
std::pair<FlowKey, KeyDirection> canonical_key(const PacketRecord& pkt);

FlowKey canonical_key(Ipv4Address src_ip, std::uint16_t src_port, Ipv4Address dst_ip, std::uint16_t dst_port,
                      std::uint8_t protocol);

enum class Side { local, remote };

std::string_view to_string(Side side);

enum class FlowScope {
    normal,    // exactly one endpoint in the subnet
    internal,  // both endpoints in the subnet; local is the first sender
    foreign,   // neither endpoint in the subnet; never labelled
};

struct Flow {
    FlowKey key;
    int epoch = 0;
    std::int64_t first_ts_us = 0;
    std::int64_t last_ts_us = 0;
    std::vector<PacketRecord> local_packets;
    std::vector<PacketRecord> remote_packets;
    Ipv4Address local_ip;
    Side first_pkt_direction = Side::local;
    FlowScope scope = FlowScope::normal;

    std::size_t packet_count() const { return local_packets.size() + remote_packets.size(); }
    double duration_s() const { return static_cast<double>(last_ts_us - first_ts_us) / 1e6; }
    const PacketRecord& first_packet() const;
};

inline constexpr double kDefaultIdleTimeoutS = 60.0;

/// Groups packets into bidirectional flows. Input order is irrelevant:
/// packets are sorted by (timestamp, field contents) first, so any
/// permutation of the input yields the same flows. A same-key gap strictly
/// greater than the idle timeout starts a new epoch. Flows come back ordered
/// by first_ts_us; foreign flows are included and flagged.
std::vector<Flow> assemble_flows(std::span<const PacketRecord> packets, const Cidr& subnet,
                                 double idle_timeout_s = kDefaultIdleTimeoutS);

}  // namespace flowforge

template <>
struct std::hash<flowforge::FlowKey> {
    std::size_t operator()(const flowforge::FlowKey& k) const noexcept
    {
        std::uint64_t h = (std::uint64_t{k.ip_a.value()} << 32) | k.ip_b.value();
        h ^= (std::uint64_t{k.port_a} << 24 | std::uint64_t{k.port_b} << 8 | k.protocol) * 0x9e3779b97f4a7c15ull;
        h ^= h >> 29;
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 32;
        return static_cast<std::size_t>(h);
    }
};

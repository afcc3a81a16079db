#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

#include "flowforge/net.hpp"

namespace flowforge {

inline constexpr std::uint8_t kProtoTcp = 6;
inline constexpr std::uint8_t kProtoUdp = 17;

namespace tcp_flag {
inline constexpr std::uint8_t fin = 0x01;
inline constexpr std::uint8_t syn = 0x02;
inline constexpr std::uint8_t rst = 0x04;
inline constexpr std::uint8_t psh = 0x08;
inline constexpr std::uint8_t ack = 0x10;
inline constexpr std::uint8_t urg = 0x20;
inline constexpr std::uint8_t ece = 0x40;
inline constexpr std::uint8_t cwr = 0x80;
}  // namespace tcp_flag

/// Bit set of TCP option kinds seen in a segment header.
namespace tcp_option {
inline constexpr std::uint8_t mss = 0x01;
inline constexpr std::uint8_t window_scale = 0x02;
inline constexpr std::uint8_t sack_permitted = 0x04;
inline constexpr std::uint8_t timestamp = 0x08;
inline constexpr std::uint8_t other = 0x10;
inline constexpr std::uint8_t all = 0x1f;
}  // namespace tcp_option

/// One captured Ethernet/IPv4 packet, reduced to the header fields the
/// pipeline consumes. Payload bytes are never retained.
struct PacketRecord {
    std::int64_t ts_us = 0;
    MacAddress src_mac;
    MacAddress dst_mac;
    std::optional<std::uint16_t> vlan_id;
    Ipv4Address src_ip;
    Ipv4Address dst_ip;
    std::uint8_t protocol = 0;
    std::uint16_t src_port = 0;
    std::uint16_t dst_port = 0;
    std::uint16_t ip_total_len = 0;
    std::uint16_t payload_len = 0;
    std::uint8_t ttl = 0;
    std::uint8_t dscp = 0;
    // Fragment offset in 8-byte units. Non-first fragments carry no L4 header,
    // so their ports are 0 and their TCP fields are absent.
    std::uint16_t frag_offset = 0;
    bool more_fragments = false;
    std::optional<std::uint8_t> tcp_flags;
    std::optional<std::uint16_t> tcp_window;
    std::uint8_t tcp_options = 0;

    bool has_l4_header() const
    {
        return frag_offset == 0 && (protocol == kProtoTcp || protocol == kProtoUdp);
    }

    auto operator<=>(const PacketRecord&) const = default;
};

/// Bytes of TCP header (including padded options) or UDP header; 0 otherwise.
int l4_header_len(const PacketRecord& pkt);

/// Bytes the TCP option block occupies for a given option bit set, padded to 4.
int tcp_options_len(std::uint8_t options);

/// Empty string when the record satisfies every PacketRecord invariant,
/// otherwise a description of the first violation.
std::string check_invariants(const PacketRecord& pkt);

/// Renders a flag byte as letters from "FSRPAUEC" in bit order.
std::string tcp_flags_to_string(std::uint8_t flags);

}  // namespace flowforge

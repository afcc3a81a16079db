#include "flowforge/packet.hpp"

namespace flowforge {

int tcp_options_len(std::uint8_t options)
{
    int len = 0;
    if (options & tcp_option::mss) len += 4;
    if (options & tcp_option::sack_permitted) len += 2;
    if (options & tcp_option::timestamp) len += 10;
    if (options & tcp_option::window_scale) len += 4;  // NOP + 3-byte option
    if (options & tcp_option::other) len += 2;
    return (len + 3) / 4 * 4;
}

int l4_header_len(const PacketRecord& pkt)
{
    if (!pkt.has_l4_header()) return 0;
    if (pkt.protocol == kProtoUdp) return 8;
    return 20 + tcp_options_len(pkt.tcp_options);
}

std::string check_invariants(const PacketRecord& pkt)
{
    const bool is_tcp_header = pkt.protocol == kProtoTcp && pkt.frag_offset == 0;
    if (pkt.payload_len > pkt.ip_total_len) return "payload_len exceeds ip_total_len";
    if (!pkt.has_l4_header() && (pkt.src_port != 0 || pkt.dst_port != 0)) {
        return "ports must be 0 without a TCP/UDP header";
    }
    if (is_tcp_header != pkt.tcp_flags.has_value() || is_tcp_header != pkt.tcp_window.has_value()) {
        return "tcp_flags/tcp_window must be present exactly for TCP headers";
    }
    if (!is_tcp_header && pkt.tcp_options != 0) return "tcp_options set on a non-TCP packet";
    if ((pkt.tcp_options & ~tcp_option::all) != 0) return "unknown tcp_options bits";
    if (pkt.vlan_id && *pkt.vlan_id > 4094) return "vlan_id out of range";
    if (pkt.dscp > 63) return "dscp out of range";
    if (pkt.frag_offset > 0x1fff) return "frag_offset out of range";
    if (pkt.ts_us < 0) return "negative timestamp";
    return {};
}

std::string tcp_flags_to_string(std::uint8_t flags)
{
    static constexpr char letters[] = "FSRPAUEC";
    std::string out;
    for (int bit = 0; bit < 8; ++bit) {
        if (flags & (1u << bit)) out.push_back(letters[bit]);
    }
    return out;
}

}  // namespace flowforge

#include "flowforge/flow.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "flowforge/error.hpp"

namespace flowforge {

std::string FlowKey::to_string() const
{
    return ip_a.to_string() + ":" + std::to_string(port_a) + " <-> " + ip_b.to_string() + ":" +
           std::to_string(port_b) + " proto " + std::to_string(protocol);
}

FlowKey canonical_key(Ipv4Address src_ip, std::uint16_t src_port, Ipv4Address dst_ip, std::uint16_t dst_port,
                      std::uint8_t protocol)
{
    if (std::pair(dst_ip, dst_port) < std::pair(src_ip, src_port)) {
        return {dst_ip, dst_port, src_ip, src_port, protocol};
    }
    return {src_ip, src_port, dst_ip, dst_port, protocol};
}

std::pair<FlowKey, KeyDirection> canonical_key(const PacketRecord& pkt)
{
    const bool swapped = std::pair(pkt.dst_ip, pkt.dst_port) < std::pair(pkt.src_ip, pkt.src_port);
    return {canonical_key(pkt.src_ip, pkt.src_port, pkt.dst_ip, pkt.dst_port, pkt.protocol),
            swapped ? KeyDirection::b_to_a : KeyDirection::a_to_b};
}

std::string_view to_string(Side side) { return side == Side::local ? "local" : "remote"; }

const PacketRecord& Flow::first_packet() const
{
    if (local_packets.empty()) return remote_packets.front();
    if (remote_packets.empty()) return local_packets.front();
    // Ties go to whichever side the flow says came first.
    const auto& l = local_packets.front();
    const auto& r = remote_packets.front();
    if (l.ts_us != r.ts_us) return l.ts_us < r.ts_us ? l : r;
    return first_pkt_direction == Side::local ? l : r;
}

std::vector<Flow> assemble_flows(std::span<const PacketRecord> packets, const Cidr& subnet, double idle_timeout_s)
{
    if (!(idle_timeout_s > 0.0)) throw ConfigError("idle timeout must be positive");
    const auto timeout_us = static_cast<std::int64_t>(std::llround(idle_timeout_s * 1e6));

    std::vector<PacketRecord> sorted(packets.begin(), packets.end());
    std::sort(sorted.begin(), sorted.end(), [](const PacketRecord& a, const PacketRecord& b) {
        if (a.ts_us != b.ts_us) return a.ts_us < b.ts_us;
        return a < b;
    });

    struct Slot {
        std::size_t flow_index = 0;
        int epochs = 0;
    };
    std::unordered_map<FlowKey, Slot> active;
    std::vector<Flow> flows;

    for (const auto& pkt : sorted) {
        const FlowKey key = canonical_key(pkt).first;
        auto [it, inserted] = active.try_emplace(key);
        Slot& slot = it->second;
        if (inserted || pkt.ts_us - flows[slot.flow_index].last_ts_us > timeout_us) {
            Flow flow;
            flow.key = key;
            flow.epoch = slot.epochs++;
            flow.first_ts_us = pkt.ts_us;
            flow.last_ts_us = pkt.ts_us;
            const bool src_in = subnet.contains(pkt.src_ip);
            const bool dst_in = subnet.contains(pkt.dst_ip);
            if (src_in && dst_in) {
                flow.scope = FlowScope::internal;
                flow.local_ip = pkt.src_ip;
            } else if (src_in || dst_in) {
                flow.local_ip = src_in ? pkt.src_ip : pkt.dst_ip;
            } else {
                flow.scope = FlowScope::foreign;
                flow.local_ip = pkt.src_ip;
            }
            flow.first_pkt_direction = pkt.src_ip == flow.local_ip ? Side::local : Side::remote;
            slot.flow_index = flows.size();
            flows.push_back(std::move(flow));
        }
        Flow& flow = flows[slot.flow_index];
        flow.last_ts_us = pkt.ts_us;
        (pkt.src_ip == flow.local_ip ? flow.local_packets : flow.remote_packets).push_back(pkt);
    }
    return flows;
}

}  // namespace flowforge

#pragma once

// Hand-rolled random generators shared by the unit and acceptance tests.

#include <cstdint>
#include <string>
#include <vector>

#include "flowforge/ml/labelled_matrix.hpp"
#include "flowforge/net.hpp"
#include "flowforge/packet.hpp"
#include "flowforge/reliability.hpp"
#include "flowforge/rng.hpp"

namespace flowforge::testgen {

inline MacAddress random_mac(Rng& rng)
{
    std::array<std::uint8_t, 6> b{};
    for (auto& x : b) x = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    return MacAddress(b);
}

/// Any record encode_frame accepts: TCP, UDP, other protocols, fragments,
/// VLAN tags, every option combination.
inline PacketRecord random_packet(Rng& rng)
{
    PacketRecord p;
    p.ts_us = rng.uniform_int(0, 4'000'000'000'000'000);
    p.src_mac = random_mac(rng);
    p.dst_mac = random_mac(rng);
    if (rng.bernoulli(0.3)) p.vlan_id = static_cast<std::uint16_t>(rng.uniform_int(0, 4094));
    p.src_ip = Ipv4Address(static_cast<std::uint32_t>(rng.next_u64()));
    p.dst_ip = Ipv4Address(static_cast<std::uint32_t>(rng.next_u64()));
    const double kind = rng.uniform01();
    p.protocol = kind < 0.45 ? kProtoTcp : kind < 0.9 ? kProtoUdp : static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    p.ttl = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    p.dscp = static_cast<std::uint8_t>(rng.uniform_int(0, 63));
    if (rng.bernoulli(0.1)) p.frag_offset = static_cast<std::uint16_t>(rng.uniform_int(1, 0x1fff));
    p.more_fragments = rng.bernoulli(0.1);
    if (p.has_l4_header()) {
        p.src_port = static_cast<std::uint16_t>(rng.uniform_int(0, 65535));
        p.dst_port = static_cast<std::uint16_t>(rng.uniform_int(0, 65535));
        if (p.protocol == kProtoTcp) {
            p.tcp_flags = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
            p.tcp_window = static_cast<std::uint16_t>(rng.uniform_int(0, 65535));
            p.tcp_options = static_cast<std::uint8_t>(rng.uniform_int(0, tcp_option::all));
        }
    }
    p.payload_len = static_cast<std::uint16_t>(rng.uniform_int(0, 1400));
    p.ip_total_len = static_cast<std::uint16_t>(20 + l4_header_len(p) + p.payload_len);
    return p;
}

struct PacketSetOptions {
    std::size_t max_packets = 5000;
    std::size_t max_keys = 50;
    double idle_timeout_s = 60.0;
};

/// Packets over a handful of conversations with idle gaps drawn around the
/// timeout, duplicated timestamps, and endpoints inside and outside
/// 10.0.0.0/24.
inline std::vector<PacketRecord> random_packet_set(Rng& rng, const PacketSetOptions& opt = {})
{
    struct Conv {
        Ipv4Address a, b;
        std::uint16_t pa, pb;
        std::uint8_t proto;
        std::int64_t t;
    };
    auto addr = [&](bool inside) {
        return inside ? Ipv4Address(10, 0, 0, static_cast<std::uint8_t>(rng.uniform_int(1, 6)))
                      : Ipv4Address(93, 184, static_cast<std::uint8_t>(rng.uniform_int(0, 2)),
                                    static_cast<std::uint8_t>(rng.uniform_int(1, 4)));
    };
    const auto n_keys = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(opt.max_keys)));
    std::vector<Conv> convs;
    for (std::size_t k = 0; k < n_keys; ++k) {
        const double where = rng.uniform01();
        Conv c;
        c.a = addr(where < 0.8);
        c.b = addr(where >= 0.6 && where < 0.7);
        c.proto = rng.bernoulli(0.6) ? kProtoTcp : kProtoUdp;
        c.pa = static_cast<std::uint16_t>(rng.uniform_int(1, 6));
        c.pb = static_cast<std::uint16_t>(rng.uniform_int(1, 6));
        c.t = rng.uniform_int(0, 200'000'000);
        convs.push_back(c);
    }
    const auto timeout_us = static_cast<std::int64_t>(opt.idle_timeout_s * 1e6);
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(opt.max_packets)));
    std::vector<PacketRecord> out;
    for (std::size_t i = 0; i < n; ++i) {
        Conv& c = convs[rng.index(convs.size())];
        const double g = rng.uniform01();
        if (g < 0.05) {
            c.t += timeout_us;  // exactly at the boundary: same flow
        } else if (g < 0.1) {
            c.t += timeout_us + 1;  // just past it: new epoch
        } else if (g < 0.15) {
            c.t += rng.uniform_int(timeout_us, 5 * timeout_us);
        } else if (g > 0.9) {
            // same timestamp as the previous packet of this conversation
        } else {
            c.t += rng.uniform_int(0, 2'000'000);
        }
        PacketRecord p;
        p.ts_us = c.t;
        const bool forward = rng.bernoulli(0.5);
        p.src_ip = forward ? c.a : c.b;
        p.dst_ip = forward ? c.b : c.a;
        p.src_port = forward ? c.pa : c.pb;
        p.dst_port = forward ? c.pb : c.pa;
        p.protocol = c.proto;
        p.ttl = static_cast<std::uint8_t>(rng.uniform_int(30, 128));
        p.ip_total_len = static_cast<std::uint16_t>(rng.uniform_int(40, 1500));
        if (c.proto == kProtoTcp) {
            p.tcp_flags = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
            p.tcp_window = static_cast<std::uint16_t>(rng.uniform_int(0, 65535));
        }
        out.push_back(p);
    }
    // Shuffle so callers cannot rely on input order.
    for (std::size_t i = out.size(); i > 1; --i) std::swap(out[i - 1], out[rng.index(i)]);
    return out;
}

inline std::vector<ActionRecord> random_run_log(Rng& rng, std::size_t n)
{
    static const char* devices[] = {"d1", "d2", "d3"};
    static const char* apps[] = {"A", "B", "C", "D"};
    std::vector<ActionRecord> log;
    for (std::size_t i = 0; i < n; ++i) {
        ActionRecord r;
        r.ts_us = static_cast<std::int64_t>(i) * 1000;
        r.device_id = devices[rng.index(3)];
        r.app_name = apps[rng.index(4)];
        r.action_name = "act";
        const double u = rng.uniform01();
        r.outcome = u < 0.1 ? Outcome::launch_failure : u < 0.25 ? Outcome::execution_failure : Outcome::success;
        r.background = rng.bernoulli(0.05);
        log.push_back(r);
    }
    return log;
}

/// Rows where only column `informative` carries the class (class * 10 plus
/// unit noise), column `constant` is fixed, and the rest are noise.
inline ml::LabelledMatrix informative_matrix(Rng& rng, std::size_t n, std::size_t p, std::size_t informative,
                                             std::size_t constant, int classes = 3)
{
    ml::LabelledMatrix m;
    m.rows = Matrix(n, p);
    for (int c = 0; c < classes; ++c) m.class_names.push_back("class" + std::to_string(c));
    for (std::size_t j = 0; j < p; ++j) m.feature_names.push_back("f" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(rng.index(static_cast<std::size_t>(classes)));
        m.labels.push_back(label);
        for (std::size_t j = 0; j < p; ++j) m.rows(i, j) = rng.uniform01();
        m.rows(i, informative) += 10.0 * label;
        m.rows(i, constant) = 5.0;
    }
    return m;
}

}  // namespace flowforge::testgen

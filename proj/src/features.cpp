#include "flowforge/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "flowforge/error.hpp"

namespace flowforge {

namespace {

template <typename T>
T mode_smallest(const std::map<T, std::int64_t>& counts)
{
    T best{};
    std::int64_t best_count = -1;
    for (const auto& [value, count] : counts) {
        if (count > best_count) {
            best = value;
            best_count = count;
        }
    }
    return best;
}

std::string options_summary(std::uint8_t options)
{
    static constexpr std::pair<std::uint8_t, std::string_view> names[] = {
        {tcp_option::mss, "mss"},
        {tcp_option::window_scale, "ws"},
        {tcp_option::sack_permitted, "sack"},
        {tcp_option::timestamp, "ts"},
        {tcp_option::other, "other"},
    };
    std::string out;
    for (const auto& [bit, name] : names) {
        if (!(options & bit)) continue;
        if (!out.empty()) out += '+';
        out += name;
    }
    return out.empty() ? "none" : out;
}

struct DirCategories {
    std::string flags;
    std::string options;
    std::string dscp;
};

DirCategories categorize_direction(std::span<const PacketRecord> packets)
{
    if (packets.empty()) return {"", "none", "none"};
    std::uint8_t flags = 0;
    std::uint8_t options = 0;
    std::map<int, std::int64_t> dscp_counts;
    for (const auto& p : packets) {
        if (p.tcp_flags) flags |= *p.tcp_flags;
        options |= p.tcp_options;
        ++dscp_counts[p.dscp];
    }
    return {tcp_flags_to_string(flags), options_summary(options), std::to_string(mode_smallest(dscp_counts))};
}

void put_dir_stats(FeatureVector& fv, Side side, const DirStats& s)
{
    const std::size_t at = dir_block_start(side);
    fv.numerical[at + 0] = static_cast<double>(s.pkt_count);
    fv.numerical[at + 1] = static_cast<double>(s.byte_count);
    fv.numerical[at + 2] = s.pkt_len_min;
    fv.numerical[at + 3] = s.pkt_len_max;
    fv.numerical[at + 4] = s.pkt_len_mean;
    fv.numerical[at + 5] = s.pkt_len_std;
    fv.numerical[at + 6] = s.iat_mean_s;
    fv.numerical[at + 7] = static_cast<double>(s.tcp_init_win);
    fv.numerical[at + 8] = static_cast<double>(s.ttl_mode);
}

}  // namespace

const std::array<std::string_view, kNumericalCount>& numerical_feature_names()
{
    static constexpr std::array<std::string_view, kNumericalCount> names = {
        "duration_s",          "local_pkt_count",    "local_byte_count",    "local_pkt_len_min",
        "local_pkt_len_max",   "local_pkt_len_mean", "local_pkt_len_std",   "local_iat_mean_s",
        "local_tcp_init_win",  "local_ttl_mode",     "remote_pkt_count",    "remote_byte_count",
        "remote_pkt_len_min",  "remote_pkt_len_max", "remote_pkt_len_mean", "remote_pkt_len_std",
        "remote_iat_mean_s",   "remote_tcp_init_win", "remote_ttl_mode",    "byte_ratio",
    };
    return names;
}

const std::array<std::string_view, kCategoricalCount>& categorical_feature_names()
{
    static constexpr std::array<std::string_view, kCategoricalCount> names = {
        "protocol",          "local_ip",           "remote_ip",           "local_port",
        "remote_port",       "local_mac",          "remote_mac",          "local_tcp_flags",
        "remote_tcp_flags",  "local_tcp_options",  "remote_tcp_options",  "first_pkt_direction",
        "vlan_id",           "local_dscp",         "remote_dscp",         "l4_service",
    };
    return names;
}

DirStats summarize_direction(std::span<const PacketRecord> packets)
{
    DirStats s;
    if (packets.empty()) return s;

    s.pkt_count = static_cast<std::int64_t>(packets.size());
    double min_len = packets.front().ip_total_len;
    double max_len = min_len;
    std::map<int, std::int64_t> ttl_counts;
    bool window_seen = false;
    for (const auto& p : packets) {
        s.byte_count += p.ip_total_len;
        min_len = std::min<double>(min_len, p.ip_total_len);
        max_len = std::max<double>(max_len, p.ip_total_len);
        ++ttl_counts[p.ttl];
        if (!window_seen && p.tcp_window) {
            s.tcp_init_win = *p.tcp_window;
            window_seen = true;
        }
    }
    const double n = static_cast<double>(packets.size());
    s.pkt_len_min = min_len;
    s.pkt_len_max = max_len;
    s.pkt_len_mean = static_cast<double>(s.byte_count) / n;
    double sq = 0.0;
    for (const auto& p : packets) {
        const double d = p.ip_total_len - s.pkt_len_mean;
        sq += d * d;
    }
    s.pkt_len_std = std::sqrt(sq / n);
    if (packets.size() >= 2) {
        s.iat_mean_s = static_cast<double>(packets.back().ts_us - packets.front().ts_us) / 1e6 / (n - 1.0);
    }
    s.ttl_mode = mode_smallest(ttl_counts);
    return s;
}

std::string_view l4_service_guess(std::uint16_t port_x, std::uint16_t port_y)
{
    static const std::map<std::uint16_t, std::string_view> well_known = {
        {20, "ftp-data"}, {21, "ftp"},     {22, "ssh"},          {23, "telnet"}, {25, "smtp"},
        {53, "domain"},   {67, "bootps"},  {68, "bootpc"},       {80, "http"},   {110, "pop3"},
        {123, "ntp"},     {143, "imap"},   {161, "snmp"},        {443, "https"}, {465, "submissions"},
        {587, "submission"}, {853, "domain-s"}, {993, "imaps"}, {995, "pop3s"},
    };
    const std::uint16_t low = std::min(port_x, port_y);
    if (low <= 1023) {
        if (auto it = well_known.find(low); it != well_known.end()) return it->second;
    }
    return "unregistered";
}

FeatureVector extract_features(const Flow& flow)
{
    if (flow.packet_count() == 0) throw DataError("cannot extract features from an empty flow");

    const DirStats local = summarize_direction(flow.local_packets);
    const DirStats remote = summarize_direction(flow.remote_packets);
    const double total_bytes = static_cast<double>(local.byte_count + remote.byte_count);

    FeatureVector fv;
    fv[Num::duration_s] = flow.duration_s();
    put_dir_stats(fv, Side::local, local);
    put_dir_stats(fv, Side::remote, remote);
    // A nonempty flow always has positive byte count (ip_total_len >= 20).
    fv[Num::byte_ratio] = total_bytes > 0.0 ? static_cast<double>(local.byte_count) / total_bytes : 0.0;

    const PacketRecord& first = flow.first_packet();
    const bool first_is_local = flow.first_pkt_direction == Side::local;
    const Ipv4Address remote_ip = first_is_local ? first.dst_ip : first.src_ip;
    const std::uint16_t local_port = first_is_local ? first.src_port : first.dst_port;
    const std::uint16_t remote_port = first_is_local ? first.dst_port : first.src_port;

    const MacAddress local_mac = !flow.local_packets.empty() ? flow.local_packets.front().src_mac
                                                             : flow.remote_packets.front().dst_mac;
    const MacAddress remote_mac = !flow.remote_packets.empty() ? flow.remote_packets.front().src_mac
                                                               : flow.local_packets.front().dst_mac;
    const DirCategories lc = categorize_direction(flow.local_packets);
    const DirCategories rc = categorize_direction(flow.remote_packets);

    fv[Cat::protocol] = std::to_string(flow.key.protocol);
    fv[Cat::local_ip] = flow.local_ip.to_string();
    fv[Cat::remote_ip] = remote_ip.to_string();
    fv[Cat::local_port] = std::to_string(local_port);
    fv[Cat::remote_port] = std::to_string(remote_port);
    fv[Cat::local_mac] = local_mac.to_string();
    fv[Cat::remote_mac] = remote_mac.to_string();
    fv[Cat::local_tcp_flags] = lc.flags;
    fv[Cat::remote_tcp_flags] = rc.flags;
    fv[Cat::local_tcp_options] = lc.options;
    fv[Cat::remote_tcp_options] = rc.options;
    fv[Cat::first_pkt_direction] = std::string(to_string(flow.first_pkt_direction));
    fv[Cat::vlan_id] = first.vlan_id ? std::to_string(*first.vlan_id) : "none";
    fv[Cat::local_dscp] = lc.dscp;
    fv[Cat::remote_dscp] = rc.dscp;
    fv[Cat::l4_service] = std::string(l4_service_guess(local_port, remote_port));
    return fv;
}

NumericalMatrix numerical_matrix(std::span<const FeatureVector> dataset)
{
    NumericalMatrix out;
    out.values = Matrix(dataset.size(), kNumericalCount);
    for (std::size_t r = 0; r < dataset.size(); ++r) {
        std::copy(dataset[r].numerical.begin(), dataset[r].numerical.end(), out.values.row(r).begin());
    }
    for (auto name : numerical_feature_names()) out.column_names.emplace_back(name);
    return out;
}

}  // namespace flowforge

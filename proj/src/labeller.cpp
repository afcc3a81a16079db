#include "flowforge/labeller.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "flowforge/csv.hpp"
#include "flowforge/error.hpp"
#include "flowforge/fileio.hpp"

namespace flowforge {

namespace {

std::string lower(std::string_view s)
{
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

struct SocketInterval {
    std::int64_t open_us = 0;
    std::int64_t close_us = 0;
    std::string owner;
};

struct DeviceKey {
    std::string device_id;
    FlowKey key;
    bool operator==(const DeviceKey&) const = default;
};

struct DeviceKeyHash {
    std::size_t operator()(const DeviceKey& k) const noexcept
    {
        return std::hash<std::string>{}(k.device_id) * 31 + std::hash<FlowKey>{}(k.key);
    }
};

using IntervalIndex = std::unordered_map<DeviceKey, std::vector<SocketInterval>, DeviceKeyHash>;

IntervalIndex build_intervals(std::span<const SocketEvent> events)
{
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return events[a].ts_us < events[b].ts_us; });

    IntervalIndex index;
    // Position of the currently open interval per (device, key), if any.
    std::unordered_map<DeviceKey, std::size_t, DeviceKeyHash> open;
    for (std::size_t i : order) {
        const SocketEvent& ev = events[i];
        DeviceKey dk{ev.device_id, canonical_key(ev.src_ip, ev.src_port, ev.dst_ip, ev.dst_port, ev.protocol)};
        const std::string owner = owner_to_string(ev.owner);
        auto& list = index[dk];
        auto it = open.find(dk);
        const bool continues = it != open.end() && list[it->second].owner == owner;
        if (ev.event == SocketEventKind::open || !continues) {
            list.push_back({ev.ts_us, ev.ts_us, owner});
            if (ev.event == SocketEventKind::close) {
                if (it != open.end()) open.erase(it);
            } else {
                open[dk] = list.size() - 1;
            }
            continue;
        }
        list[it->second].close_us = ev.ts_us;
        if (ev.event == SocketEventKind::close) open.erase(it);
    }
    return index;
}

}  // namespace

std::string_view to_string(Os os) { return os == Os::android ? "Android" : "iOS"; }

Os parse_os(std::string_view text)
{
    const auto l = lower(text);
    if (l == "android") return Os::android;
    if (l == "ios") return Os::ios;
    throw FormatError("unknown OS '" + std::string(text) + "'");
}

std::string_view to_string(SocketEventKind kind)
{
    switch (kind) {
    case SocketEventKind::open: return "open";
    case SocketEventKind::poll: return "poll";
    case SocketEventKind::close: return "close";
    }
    return "open";
}

SocketEventKind parse_socket_event_kind(std::string_view text)
{
    if (text == "open") return SocketEventKind::open;
    if (text == "poll") return SocketEventKind::poll;
    if (text == "close") return SocketEventKind::close;
    throw FormatError("unknown socket event '" + std::string(text) + "'");
}

std::string owner_to_string(const SocketOwner& owner)
{
    if (const auto* uid = std::get_if<std::int64_t>(&owner)) return std::to_string(*uid);
    return std::get<std::string>(owner);
}

std::string_view to_string(LabelConfidence c)
{
    switch (c) {
    case LabelConfidence::exact: return "exact";
    case LabelConfidence::nearest_in_time: return "nearest_in_time";
    case LabelConfidence::unlabelled: return "unlabelled";
    }
    return "unlabelled";
}

LabelConfidence parse_label_confidence(std::string_view text)
{
    if (text == "exact") return LabelConfidence::exact;
    if (text == "nearest_in_time") return LabelConfidence::nearest_in_time;
    if (text == "unlabelled") return LabelConfidence::unlabelled;
    throw FormatError("unknown label confidence '" + std::string(text) + "'");
}

void UidMap::add(const std::string& device_id, const std::string& owner, const std::string& app_name)
{
    entries_[{device_id, owner}] = app_name;
}

const std::string* UidMap::find(const std::string& device_id, const std::string& owner) const
{
    auto it = entries_.find({device_id, owner});
    return it == entries_.end() ? nullptr : &it->second;
}

std::vector<LabelledFlow> label_flows(std::span<const Flow> flows, std::span<const SocketEvent> events,
                                      const UidMap& uid_map, const DeviceMap& device_map,
                                      const LabelOptions& options)
{
    std::set<std::string> orphans;
    for (const auto& ev : events) {
        const auto owner = owner_to_string(ev.owner);
        if (!uid_map.find(ev.device_id, owner)) orphans.insert(ev.device_id + "/" + owner);
    }
    if (!orphans.empty()) {
        std::string list;
        for (const auto& o : orphans) list += (list.empty() ? "" : ", ") + o;
        throw DataError("socket owners missing from UID map: " + list);
    }

    const IntervalIndex intervals = build_intervals(events);
    const auto grace_us = static_cast<std::int64_t>(std::llround(options.grace_s * 1e6));
    const auto max_gap_us = static_cast<std::int64_t>(std::llround(options.nearest_max_gap_s * 1e6));

    std::vector<LabelledFlow> out;
    out.reserve(flows.size());
    for (const auto& flow : flows) {
        if (flow.scope == FlowScope::foreign) continue;
        auto dev = device_map.find(flow.local_ip);
        if (dev == device_map.end()) {
            throw DataError("flow local IP " + flow.local_ip.to_string() + " missing from device map");
        }

        LabelledFlow lf;
        lf.features = extract_features(flow);
        lf.os_label = dev->second.os;
        lf.device_id = dev->second.device_id;
        lf.key = flow.key;
        lf.epoch = flow.epoch;
        lf.first_ts_us = flow.first_ts_us;
        lf.last_ts_us = flow.last_ts_us;
        lf.app_label = std::string(kUnknownApp);
        lf.label_confidence = LabelConfidence::unlabelled;

        const SocketInterval* best = nullptr;
        std::int64_t best_overlap = -1;
        const SocketInterval* nearest = nullptr;
        std::int64_t nearest_gap = 0;
        if (auto it = intervals.find({lf.device_id, flow.key}); it != intervals.end()) {
            for (const auto& iv : it->second) {
                const std::int64_t lo = iv.open_us - grace_us;
                const std::int64_t hi = iv.close_us + grace_us;
                const std::int64_t overlap = std::min(hi, flow.last_ts_us) - std::max(lo, flow.first_ts_us);
                if (overlap >= 0) {
                    if (overlap > best_overlap || (overlap == best_overlap && iv.open_us < best->open_us)) {
                        best = &iv;
                        best_overlap = overlap;
                    }
                } else if (!nearest || -overlap < nearest_gap ||
                           (-overlap == nearest_gap && iv.open_us < nearest->open_us)) {
                    nearest = &iv;
                    nearest_gap = -overlap;
                }
            }
        }
        if (best) {
            const bool inside = flow.first_ts_us >= best->open_us - grace_us && flow.last_ts_us <= best->close_us + grace_us;
            lf.app_label = *uid_map.find(lf.device_id, best->owner);
            lf.label_confidence = inside ? LabelConfidence::exact : LabelConfidence::nearest_in_time;
        } else if (nearest && nearest_gap <= max_gap_us) {
            lf.app_label = *uid_map.find(lf.device_id, nearest->owner);
            lf.label_confidence = LabelConfidence::nearest_in_time;
        }
        out.push_back(std::move(lf));
    }
    return out;
}

LabelAccuracy label_accuracy(std::span<const LabelledFlow> labelled, std::span<const GroundTruth> truth)
{
    std::unordered_map<FlowKey, std::vector<const GroundTruth*>> by_key;
    for (const auto& t : truth) by_key[t.key].push_back(&t);

    LabelAccuracy acc;
    acc.total = labelled.size();
    for (const auto& lf : labelled) {
        const GroundTruth* match = nullptr;
        std::int64_t best_overlap = -1;
        if (auto it = by_key.find(lf.key); it != by_key.end()) {
            for (const auto* t : it->second) {
                const std::int64_t overlap =
                    std::min(t->last_ts_us, lf.last_ts_us) - std::max(t->first_ts_us, lf.first_ts_us);
                if (overlap > best_overlap) {
                    match = t;
                    best_overlap = overlap;
                }
            }
        }
        if (match && lf.label_confidence != LabelConfidence::unlabelled && match->app_name == lf.app_label) {
            ++acc.correct;
        } else {
            acc.mismatches.push_back({lf.key, lf.epoch, match ? match->app_name : "<no truth>", lf.app_label});
        }
    }
    acc.fraction = acc.total == 0 ? 1.0 : static_cast<double>(acc.correct) / static_cast<double>(acc.total);
    return acc;
}

// ---------------------------------------------------------------------------
// File formats

std::string socket_event_to_json_line(const SocketEvent& ev)
{
    nlohmann::ordered_json j;
    j["ts_us"] = ev.ts_us;
    j["device_id"] = ev.device_id;
    j["event"] = to_string(ev.event);
    j["proto"] = ev.protocol;
    j["src_ip"] = ev.src_ip.to_string();
    j["src_port"] = ev.src_port;
    j["dst_ip"] = ev.dst_ip.to_string();
    j["dst_port"] = ev.dst_port;
    if (const auto* uid = std::get_if<std::int64_t>(&ev.owner)) {
        j["uid"] = *uid;
    } else {
        j["process"] = std::get<std::string>(ev.owner);
    }
    return j.dump();
}

SocketEvent socket_event_from_json_line(std::string_view line)
{
    try {
        const auto j = nlohmann::json::parse(line);
        SocketEvent ev;
        ev.ts_us = j.at("ts_us").get<std::int64_t>();
        ev.device_id = j.at("device_id").get<std::string>();
        ev.event = parse_socket_event_kind(j.at("event").get<std::string>());
        ev.protocol = j.at("proto").get<std::uint8_t>();
        ev.src_ip = Ipv4Address::parse(j.at("src_ip").get<std::string>());
        ev.src_port = j.at("src_port").get<std::uint16_t>();
        ev.dst_ip = Ipv4Address::parse(j.at("dst_ip").get<std::string>());
        ev.dst_port = j.at("dst_port").get<std::uint16_t>();
        const bool has_uid = j.contains("uid");
        const bool has_process = j.contains("process");
        if (has_uid == has_process) throw FormatError("exactly one of 'uid' or 'process' is required");
        if (has_uid) {
            ev.owner = j.at("uid").get<std::int64_t>();
        } else {
            ev.owner = j.at("process").get<std::string>();
        }
        return ev;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("socket event: ") + e.what());
    }
}

void write_socket_events(std::span<const SocketEvent> events, const std::filesystem::path& path)
{
    std::string text;
    for (const auto& ev : events) text += socket_event_to_json_line(ev) + "\n";
    write_text_file(path, text);
}

std::vector<SocketEvent> read_socket_events(const std::filesystem::path& path)
{
    std::vector<SocketEvent> events;
    std::size_t line_no = 0;
    for (const auto& line : nonblank_lines(read_text_file(path))) {
        ++line_no;
        try {
            events.push_back(socket_event_from_json_line(line));
        } catch (const FormatError& e) {
            throw FormatError("'" + path.string() + "' line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return events;
}

namespace {

std::vector<csv::Row> read_table(const std::filesystem::path& path, const csv::Row& expected_header)
{
    auto rows = csv::read_file(path);
    if (rows.empty() || rows.front() != expected_header) {
        throw FormatError("'" + path.string() + "': expected header '" + csv::format_row(expected_header) + "'");
    }
    rows.erase(rows.begin());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != expected_header.size()) {
            throw FormatError("'" + path.string() + "' row " + std::to_string(i + 2) + ": expected " +
                              std::to_string(expected_header.size()) + " fields");
        }
    }
    return rows;
}

std::int64_t parse_int(const std::string& cell, const std::string& what)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw FormatError("invalid " + what + " '" + cell + "'");
    }
    return v;
}

const csv::Row kUidHeader = {"device_id", "owner", "app_name"};
const csv::Row kDeviceHeader = {"ip", "device_id", "os", "os_version"};
const csv::Row kTruthHeader = {"ip_a",     "port_a",     "ip_b",        "port_b",   "protocol", "episode",
                               "first_ts_us", "last_ts_us", "app_name", "os",       "device_id"};

}  // namespace

void write_uid_map(const UidMap& map, const std::filesystem::path& path)
{
    std::string text = csv::format_row(kUidHeader) + "\n";
    for (const auto& [k, app] : map.entries()) text += csv::format_row({k.first, k.second, app}) + "\n";
    write_text_file(path, text);
}

UidMap read_uid_map(const std::filesystem::path& path)
{
    UidMap map;
    for (const auto& r : read_table(path, kUidHeader)) map.add(r[0], r[1], r[2]);
    return map;
}

void write_device_map(const DeviceMap& map, const std::filesystem::path& path)
{
    std::string text = csv::format_row(kDeviceHeader) + "\n";
    for (const auto& [ip, d] : map) {
        text += csv::format_row({ip.to_string(), d.device_id, std::string(to_string(d.os)), d.os_version}) + "\n";
    }
    write_text_file(path, text);
}

DeviceMap read_device_map(const std::filesystem::path& path)
{
    DeviceMap map;
    for (const auto& r : read_table(path, kDeviceHeader)) {
        map[Ipv4Address::parse(r[0])] = DeviceInfo{r[1], parse_os(r[2]), r[3]};
    }
    return map;
}

void write_truth(std::span<const GroundTruth> truth, const std::filesystem::path& path)
{
    std::string text = csv::format_row(kTruthHeader) + "\n";
    for (const auto& t : truth) {
        text += csv::format_row({t.key.ip_a.to_string(), std::to_string(t.key.port_a), t.key.ip_b.to_string(),
                                 std::to_string(t.key.port_b), std::to_string(t.key.protocol),
                                 std::to_string(t.episode), std::to_string(t.first_ts_us),
                                 std::to_string(t.last_ts_us), t.app_name, std::string(to_string(t.os)),
                                 t.device_id}) +
                "\n";
    }
    write_text_file(path, text);
}

std::vector<GroundTruth> read_truth(const std::filesystem::path& path)
{
    std::vector<GroundTruth> truth;
    for (const auto& r : read_table(path, kTruthHeader)) {
        GroundTruth t;
        t.key = {Ipv4Address::parse(r[0]), static_cast<std::uint16_t>(parse_int(r[1], "port")),
                 Ipv4Address::parse(r[2]), static_cast<std::uint16_t>(parse_int(r[3], "port")),
                 static_cast<std::uint8_t>(parse_int(r[4], "protocol"))};
        t.episode = static_cast<int>(parse_int(r[5], "episode"));
        t.first_ts_us = parse_int(r[6], "first_ts_us");
        t.last_ts_us = parse_int(r[7], "last_ts_us");
        t.app_name = r[8];
        t.os = parse_os(r[9]);
        t.device_id = r[10];
        truth.push_back(std::move(t));
    }
    return truth;
}

}  // namespace flowforge

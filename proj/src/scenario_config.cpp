#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "flowforge/error.hpp"
#include "flowforge/fileio.hpp"
#include "flowforge/testbed.hpp"

namespace flowforge::testbed {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

namespace {

// Apps that exist on a single platform in the catalogue.
const std::vector<std::pair<std::string_view, Os>> kSingleOsApps = {
    {"Gmail", Os::android},      {"Chrome", Os::android}, {"Google Maps", Os::android},
    {"Apple Mail", Os::ios},     {"Apple Maps", Os::ios}, {"Safari", Os::ios},
};

void check(bool ok, const std::string& what)
{
    if (!ok) throw ConfigError(what);
}

void check_range(const UniformInt& d, const std::string& what)
{
    check(d.min <= d.max, what + ": min exceeds max");
}

void check_range(const UniformReal& d, const std::string& what)
{
    check(std::isfinite(d.min) && std::isfinite(d.max) && d.min <= d.max, what + ": invalid bounds");
}

void validate_burst(const TrafficBurst& b, const ScenarioConfig& c, const std::string& where)
{
    check_range(b.pkt_count, where + " pkt_count");
    check_range(b.pkt_len, where + " pkt_len");
    check_range(b.inter_pkt_gap_us, where + " inter_pkt_gap_us");
    check_range(b.lead_gap_us, where + " lead_gap_us");
    check(b.pkt_count.min >= 1, where + ": pkt_count must be at least 1");
    check(b.pkt_len.min >= 40 && b.pkt_len.max <= 1500, where + ": pkt_len must lie within 40..1500");
    check(b.inter_pkt_gap_us.min >= 0 && b.lead_gap_us.min >= 0, where + ": gaps must be nonnegative");
    const double max_gap_us = c.max_intra_episode_gap_s * 1e6;
    check(static_cast<double>(b.inter_pkt_gap_us.max) <= max_gap_us &&
              static_cast<double>(b.lead_gap_us.max) <= max_gap_us,
          where + ": gaps must not exceed max_intra_episode_gap_s");
}

// ---- JSON helpers -------------------------------------------------------

ojson to_j(const UniformInt& d) { return ojson{{"min", d.min}, {"max", d.max}}; }
ojson to_j(const UniformReal& d) { return ojson{{"min", d.min}, {"max", d.max}}; }

UniformInt int_dist(const json& j) { return {j.at("min").get<std::int64_t>(), j.at("max").get<std::int64_t>()}; }
UniformReal real_dist(const json& j) { return {j.at("min").get<double>(), j.at("max").get<double>()}; }

ojson to_j(const TrafficBurst& b)
{
    ojson j;
    j["direction"] = b.direction == BurstDirection::up ? "up" : "down";
    j["pkt_count"] = to_j(b.pkt_count);
    j["pkt_len"] = to_j(b.pkt_len);
    j["inter_pkt_gap_us"] = to_j(b.inter_pkt_gap_us);
    j["lead_gap_us"] = to_j(b.lead_gap_us);
    j["tcp_window_base"] = b.tcp_window_base;
    return j;
}

TrafficBurst burst_from(const json& j)
{
    TrafficBurst b;
    const auto dir = j.at("direction").get<std::string>();
    if (dir != "up" && dir != "down") throw ConfigError("burst direction must be 'up' or 'down'");
    b.direction = dir == "up" ? BurstDirection::up : BurstDirection::down;
    b.pkt_count = int_dist(j.at("pkt_count"));
    b.pkt_len = int_dist(j.at("pkt_len"));
    b.inter_pkt_gap_us = int_dist(j.at("inter_pkt_gap_us"));
    if (j.contains("lead_gap_us")) b.lead_gap_us = int_dist(j.at("lead_gap_us"));
    b.tcp_window_base = j.value("tcp_window_base", std::uint16_t{65535});
    return b;
}

ojson to_j(const std::vector<TrafficBurst>& bursts)
{
    ojson arr = ojson::array();
    for (const auto& b : bursts) arr.push_back(to_j(b));
    return arr;
}

std::vector<TrafficBurst> bursts_from(const json& j)
{
    std::vector<TrafficBurst> out;
    for (const auto& b : j) out.push_back(burst_from(b));
    return out;
}

ojson to_j(const AppModel& a)
{
    ojson j;
    j["app_name"] = a.app_name;
    ojson os = ojson::array();
    for (Os o : a.os_availability) os.push_back(to_string(o));
    j["os_availability"] = os;
    j["protocol"] = a.protocol;
    ojson eps = ojson::array();
    for (const auto& e : a.server_endpoints) eps.push_back(ojson{{"ip", e.ip.to_string()}, {"port", e.port}});
    j["server_endpoints"] = eps;
    if (!a.ios_process.empty()) j["ios_process"] = a.ios_process;
    if (a.background_poll_period_s) {
        j["background_poll_period_s"] = *a.background_poll_period_s;
        j["background_poll"] = to_j(a.background_poll);
    }
    ojson actions = ojson::array();
    for (const auto& act : a.actions) {
        ojson aj;
        aj["action_name"] = act.action_name;
        aj["weight"] = act.weight;
        aj["duration_s"] = to_j(act.duration_s);
        aj["steps"] = to_j(act.steps);
        actions.push_back(aj);
    }
    j["actions"] = actions;
    return j;
}

AppModel app_from(const json& j)
{
    AppModel a;
    a.app_name = j.at("app_name").get<std::string>();
    for (const auto& o : j.at("os_availability")) a.os_availability.push_back(parse_os(o.get<std::string>()));
    a.protocol = j.value("protocol", kProtoTcp);
    for (const auto& e : j.at("server_endpoints")) {
        a.server_endpoints.push_back({Ipv4Address::parse(e.at("ip").get<std::string>()), e.at("port").get<std::uint16_t>()});
    }
    a.ios_process = j.value("ios_process", std::string{});
    if (j.contains("background_poll_period_s")) {
        a.background_poll_period_s = j.at("background_poll_period_s").get<double>();
        a.background_poll = bursts_from(j.at("background_poll"));
    }
    for (const auto& aj : j.at("actions")) {
        ActionModel act;
        act.action_name = aj.at("action_name").get<std::string>();
        act.weight = aj.value("weight", 1.0);
        act.duration_s = real_dist(aj.at("duration_s"));
        act.steps = bursts_from(aj.at("steps"));
        a.actions.push_back(std::move(act));
    }
    return a;
}

}  // namespace

void validate(const ScenarioConfig& c)
{
    check(std::isfinite(c.duration_s) && c.duration_s >= 0.0, "duration_s must be a nonnegative number");
    check(c.start_ts_us >= 0, "start_ts_us must be nonnegative");
    check_range(c.idle_s, "idle_s");
    check(c.idle_s.min >= 0.0, "idle_s must be nonnegative");
    check_range(c.handshake_rtt_us, "handshake_rtt_us");
    check(c.handshake_rtt_us.min >= 0, "handshake_rtt_us must be nonnegative");
    check_range(c.remote_ttl, "remote_ttl");
    check(c.remote_ttl.min >= 1 && c.remote_ttl.max <= 255, "remote_ttl must lie within 1..255");
    check(c.port_reuse_prob >= 0.0 && c.port_reuse_prob <= 1.0, "port_reuse_prob must lie in [0,1]");
    check(c.port_reuse_min_gap_s > c.max_intra_episode_gap_s,
          "port_reuse_min_gap_s must exceed max_intra_episode_gap_s");
    check(c.socket_poll_interval_s > 0.0, "socket_poll_interval_s must be positive");
    check(c.max_intra_episode_gap_s > 0.0, "max_intra_episode_gap_s must be positive");

    std::set<std::string> app_names;
    for (const auto& a : c.apps) {
        const std::string where = "app '" + a.app_name + "'";
        check(!a.app_name.empty(), "app with empty name");
        check(app_names.insert(a.app_name).second, "duplicate " + where);
        check(!a.os_availability.empty(), where + ": os_availability is empty");
        for (const auto& [name, only] : kSingleOsApps) {
            if (a.app_name == name) {
                check(a.os_availability.size() == 1 && a.os_availability.front() == only,
                      where + " is only available on " + std::string(to_string(only)));
            }
        }
        check(a.protocol == kProtoTcp || a.protocol == kProtoUdp, where + ": protocol must be 6 or 17");
        check(!a.server_endpoints.empty(), where + ": no server endpoints");
        for (const auto& e : a.server_endpoints) {
            check(!c.subnet.contains(e.ip), where + ": endpoint " + e.ip.to_string() + " lies inside the testbed subnet");
        }
        check(!a.actions.empty(), where + ": no actions");
        for (const auto& act : a.actions) {
            const std::string aw = where + " action '" + act.action_name + "'";
            check(std::isfinite(act.weight) && act.weight >= 0.0, aw + ": weight must be nonnegative");
            check(!act.steps.empty(), aw + ": steps are empty");
            check_range(act.duration_s, aw + " duration_s");
            check(act.duration_s.min >= 0.0, aw + ": duration must be nonnegative");
            for (const auto& b : act.steps) validate_burst(b, c, aw);
        }
        if (a.background_poll_period_s) {
            check(*a.background_poll_period_s > 0.0, where + ": background_poll_period_s must be positive");
            check(!a.background_poll.empty(), where + ": background poll has no traffic");
            for (const auto& b : a.background_poll) validate_burst(b, c, where + " background poll");
        }
    }

    std::set<std::string> device_ids;
    std::set<Ipv4Address> ips;
    for (const auto& d : c.devices) {
        const std::string where = "device '" + d.device_id + "'";
        check(!d.device_id.empty(), "device with empty id");
        check(device_ids.insert(d.device_id).second, "duplicate " + where);
        check(ips.insert(d.local_ip).second, where + ": local_ip " + d.local_ip.to_string() + " is not unique");
        check(c.subnet.contains(d.local_ip), where + ": local_ip outside subnet " + c.subnet.to_string());
        check(!d.installed_apps.empty(), where + " has no installed apps");
        double total_weight = 0.0;
        std::set<std::string> seen;
        for (const auto& name : d.installed_apps) {
            const AppModel* app = find_app(c, name);
            check(app != nullptr, where + ": installed app '" + name + "' not in catalogue");
            check(seen.insert(name).second, where + ": app '" + name + "' installed twice");
            check(std::find(app->os_availability.begin(), app->os_availability.end(), d.os) !=
                      app->os_availability.end(),
                  where + ": app '" + name + "' is not available on " + std::string(to_string(d.os)));
            check(d.os == Os::android || !app->ios_process.empty(),
                  where + ": app '" + name + "' has no ios_process");
            for (const auto& act : app->actions) total_weight += act.weight;
        }
        check(total_weight > 0.0, where + ": installed actions have zero total weight");
    }

    for (const auto& f : c.failure_rates) {
        const std::string where = "failure rate for (" + f.device_id + ", " + f.app_name + ")";
        check(find_device(c, f.device_id) != nullptr, where + ": unknown device");
        check(find_app(c, f.app_name) != nullptr, where + ": unknown app");
        check(f.lf_prob >= 0.0 && f.lf_prob <= 1.0 && f.ef_prob >= 0.0 && f.ef_prob <= 1.0,
              where + ": probabilities must lie in [0,1]");
    }
}

const AppModel* find_app(const ScenarioConfig& config, std::string_view app_name)
{
    for (const auto& a : config.apps) {
        if (a.app_name == app_name) return &a;
    }
    return nullptr;
}

const DeviceProfile* find_device(const ScenarioConfig& config, std::string_view device_id)
{
    for (const auto& d : config.devices) {
        if (d.device_id == device_id) return &d;
    }
    return nullptr;
}

SocketOwner owner_for(const ScenarioConfig&, const DeviceProfile& device, const AppModel& app)
{
    if (device.os == Os::ios) return app.ios_process;
    const auto pos = std::find(device.installed_apps.begin(), device.installed_apps.end(), app.app_name) -
                     device.installed_apps.begin();
    // Android assigns application UIDs from 10000 upward at install time.
    return std::int64_t{10100} + static_cast<std::int64_t>(pos);
}

UidMap build_uid_map(const ScenarioConfig& config)
{
    UidMap map;
    for (const auto& d : config.devices) {
        for (const auto& name : d.installed_apps) {
            const AppModel* app = find_app(config, name);
            if (app) map.add(d.device_id, owner_to_string(owner_for(config, d, *app)), app->app_name);
        }
    }
    return map;
}

DeviceMap build_device_map(const ScenarioConfig& config)
{
    DeviceMap map;
    for (const auto& d : config.devices) map[d.local_ip] = DeviceInfo{d.device_id, d.os, d.os_version};
    return map;
}

std::string to_json_text(const ScenarioConfig& c)
{
    ojson j;
    j["duration_s"] = c.duration_s;
    j["seed"] = c.seed;
    j["subnet"] = c.subnet.to_string();
    j["start_ts_us"] = c.start_ts_us;
    j["idle_s"] = to_j(c.idle_s);
    j["handshake_rtt_us"] = to_j(c.handshake_rtt_us);
    j["remote_ttl"] = to_j(c.remote_ttl);
    j["gateway_mac"] = c.gateway_mac.to_string();
    j["port_reuse_prob"] = c.port_reuse_prob;
    j["port_reuse_min_gap_s"] = c.port_reuse_min_gap_s;
    j["socket_poll_interval_s"] = c.socket_poll_interval_s;
    j["max_intra_episode_gap_s"] = c.max_intra_episode_gap_s;

    ojson devices = ojson::array();
    for (const auto& d : c.devices) {
        ojson dj;
        dj["device_id"] = d.device_id;
        dj["model"] = d.model;
        dj["os"] = to_string(d.os);
        dj["os_version"] = d.os_version;
        dj["local_ip"] = d.local_ip.to_string();
        dj["mac"] = d.mac.to_string();
        dj["ttl_default"] = d.ttl_default;
        dj["installed_apps"] = d.installed_apps;
        devices.push_back(dj);
    }
    j["devices"] = devices;

    ojson rates = ojson::array();
    for (const auto& f : c.failure_rates) {
        rates.push_back(ojson{{"device_id", f.device_id}, {"app_name", f.app_name}, {"lf_prob", f.lf_prob},
                              {"ef_prob", f.ef_prob}});
    }
    j["failure_rates"] = rates;

    ojson apps = ojson::array();
    for (const auto& a : c.apps) apps.push_back(to_j(a));
    j["apps"] = apps;
    return j.dump(2) + "\n";
}

ScenarioConfig from_json_text(std::string_view text)
{
    try {
        const json j = json::parse(text);
        ScenarioConfig c;
        c.duration_s = j.at("duration_s").get<double>();
        c.seed = j.value("seed", std::uint64_t{0});
        c.subnet = Cidr::parse(j.at("subnet").get<std::string>());
        c.start_ts_us = j.value("start_ts_us", c.start_ts_us);
        if (j.contains("idle_s")) c.idle_s = real_dist(j.at("idle_s"));
        if (j.contains("handshake_rtt_us")) c.handshake_rtt_us = int_dist(j.at("handshake_rtt_us"));
        if (j.contains("remote_ttl")) c.remote_ttl = int_dist(j.at("remote_ttl"));
        if (j.contains("gateway_mac")) c.gateway_mac = MacAddress::parse(j.at("gateway_mac").get<std::string>());
        c.port_reuse_prob = j.value("port_reuse_prob", c.port_reuse_prob);
        c.port_reuse_min_gap_s = j.value("port_reuse_min_gap_s", c.port_reuse_min_gap_s);
        c.socket_poll_interval_s = j.value("socket_poll_interval_s", c.socket_poll_interval_s);
        c.max_intra_episode_gap_s = j.value("max_intra_episode_gap_s", c.max_intra_episode_gap_s);
        for (const auto& dj : j.at("devices")) {
            DeviceProfile d;
            d.device_id = dj.at("device_id").get<std::string>();
            d.model = dj.value("model", std::string{});
            d.os = parse_os(dj.at("os").get<std::string>());
            d.os_version = dj.value("os_version", std::string{});
            d.local_ip = Ipv4Address::parse(dj.at("local_ip").get<std::string>());
            d.mac = MacAddress::parse(dj.at("mac").get<std::string>());
            d.ttl_default = dj.value("ttl_default", std::uint8_t{64});
            d.installed_apps = dj.at("installed_apps").get<std::vector<std::string>>();
            c.devices.push_back(std::move(d));
        }
        if (j.contains("failure_rates")) {
            for (const auto& fj : j.at("failure_rates")) {
                c.failure_rates.push_back({fj.at("device_id").get<std::string>(), fj.at("app_name").get<std::string>(),
                                           fj.value("lf_prob", 0.0), fj.value("ef_prob", 0.0)});
            }
        }
        for (const auto& aj : j.at("apps")) c.apps.push_back(app_from(aj));
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("scenario config: ") + e.what());
    } catch (const FormatError& e) {
        throw ConfigError(std::string("scenario config: ") + e.what());
    }
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
    auto config = from_json_text(read_text_file(path));
    validate(config);
    return config;
}

std::uint64_t config_hash(const ScenarioConfig& config)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : to_json_text(config)) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace flowforge::testbed

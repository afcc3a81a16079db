#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "flowforge/error.hpp"
#include "flowforge/rng.hpp"
#include "flowforge/testbed.hpp"

namespace flowforge::testbed {

namespace {

constexpr std::uint64_t kStreamSchedule = 0x1000;
constexpr std::uint64_t kStreamPolls = 0x2000;
constexpr std::uint64_t kStreamFailures = 0x3000;
constexpr std::uint64_t kStreamScenarioFailures = 0x3001;
constexpr std::uint64_t kStreamPorts = 0x5000;
constexpr std::uint64_t kStreamTraffic = 0x4000'0000;

constexpr std::uint16_t kEphemeralLo = 49152;
constexpr std::uint16_t kEphemeralHi = 65535;

constexpr std::uint16_t kTcpHandshakeLen = 60;  // 20 IP + 20 TCP + 20 options
constexpr std::uint16_t kTcpMinLen = 52;        // 20 IP + 20 TCP + timestamp option
constexpr std::uint16_t kUdpMinLen = 28;

std::int64_t to_us(double s) { return static_cast<std::int64_t>(std::llround(s * 1e6)); }

struct Choice {
    const AppModel* app;
    const ActionModel* action;
};

struct Emitted {
    std::int64_t ts_us;
    bool up;
    std::uint16_t len;
    std::uint8_t flags;
    std::uint16_t window;
    std::uint8_t options;
};

// Relative packet timeline of one socket episode; ports are assigned later.
std::vector<Emitted> realize_traffic(const AppModel& app, std::span<const TrafficBurst> steps,
                                     const ScenarioConfig& config, std::int64_t t0, Rng& rng)
{
    std::vector<Emitted> out;
    const bool tcp = app.protocol == kProtoTcp;
    std::int64_t t = t0;
    auto emit = [&](bool up, std::int64_t len, std::uint8_t flags, std::uint16_t window, std::uint8_t options) {
        if (!out.empty()) t = std::max(t, out.back().ts_us + 1);
        out.push_back({t, up, static_cast<std::uint16_t>(len), flags, window, options});
    };

    if (tcp) {
        auto window_of = [&](BurstDirection dir) {
            for (const auto& b : steps) {
                if (b.direction == dir) return b.tcp_window_base;
            }
            return steps.front().tcp_window_base;
        };
        const auto handshake_opts = static_cast<std::uint8_t>(tcp_option::mss | tcp_option::window_scale |
                                                              tcp_option::sack_permitted | tcp_option::timestamp);
        emit(true, kTcpHandshakeLen, tcp_flag::syn, window_of(BurstDirection::up), handshake_opts);
        t += rng.uniform_int(config.handshake_rtt_us.min, config.handshake_rtt_us.max);
        emit(false, kTcpHandshakeLen, tcp_flag::syn | tcp_flag::ack, window_of(BurstDirection::down), handshake_opts);
        t += rng.uniform_int(100, 1000);
        emit(true, kTcpMinLen, tcp_flag::ack, window_of(BurstDirection::up), tcp_option::timestamp);
    }

    const std::int64_t min_len = tcp ? kTcpMinLen : kUdpMinLen;
    for (const auto& b : steps) {
        t += rng.uniform_int(b.lead_gap_us.min, b.lead_gap_us.max);
        const auto count = rng.uniform_int(b.pkt_count.min, b.pkt_count.max);
        for (std::int64_t k = 0; k < count; ++k) {
            if (k > 0) t += rng.uniform_int(b.inter_pkt_gap_us.min, b.inter_pkt_gap_us.max);
            const auto len = std::max(min_len, rng.uniform_int(b.pkt_len.min, b.pkt_len.max));
            if (tcp) {
                emit(b.direction == BurstDirection::up, len, tcp_flag::psh | tcp_flag::ack, b.tcp_window_base,
                     tcp_option::timestamp);
            } else {
                emit(b.direction == BurstDirection::up, len, 0, 0, 0);
            }
        }
    }
    if (tcp && out.size() > 3) out.back().flags |= tcp_flag::fin;
    return out;
}

class PortAllocator {
public:
    PortAllocator(std::uint64_t seed, double reuse_prob, double min_gap_s)
        : rng_(seed), reuse_prob_(reuse_prob), min_gap_us_(to_us(min_gap_s))
    {
    }

    std::uint16_t allocate(std::int64_t start_us, std::int64_t end_us)
    {
        std::uint16_t port = 0;
        if (!last_end_.empty() && rng_.bernoulli(reuse_prob_)) {
            std::vector<std::uint16_t> available;
            for (const auto& [p, end] : last_end_) {
                if (end + min_gap_us_ < start_us) available.push_back(p);
            }
            if (!available.empty()) port = available[rng_.index(available.size())];
        }
        if (port == 0) {
            if (last_end_.size() >= static_cast<std::size_t>(kEphemeralHi - kEphemeralLo + 1)) {
                throw DataError("ephemeral port range exhausted");
            }
            do {
                port = static_cast<std::uint16_t>(rng_.uniform_int(kEphemeralLo, kEphemeralHi));
            } while (last_end_.count(port) != 0);
        }
        last_end_[port] = end_us;
        return port;
    }

private:
    Rng rng_;
    double reuse_prob_;
    std::int64_t min_gap_us_;
    std::map<std::uint16_t, std::int64_t> last_end_;
};

}  // namespace

std::vector<ActionRecord> schedule_actions(const ScenarioConfig& config)
{
    std::vector<ActionRecord> out;
    const std::int64_t end_us = config.start_ts_us + to_us(config.duration_s);
    for (std::size_t di = 0; di < config.devices.size(); ++di) {
        const auto& dev = config.devices[di];
        Rng rng(derive_seed(config.seed, kStreamSchedule + di));

        std::vector<Choice> choices;
        double total_weight = 0.0;
        for (const auto& name : dev.installed_apps) {
            const AppModel* app = find_app(config, name);
            if (!app) throw ConfigError("device '" + dev.device_id + "': unknown app '" + name + "'");
            for (const auto& act : app->actions) {
                choices.push_back({app, &act});
                total_weight += act.weight;
            }
        }
        if (choices.empty() || total_weight <= 0.0) continue;

        std::map<std::string, std::int64_t> first_end;  // app -> end of its first foreground action
        std::int64_t t = config.start_ts_us + to_us(rng.uniform(0.0, config.idle_s.max));
        while (t < end_us) {
            double pick = rng.uniform01() * total_weight;
            const Choice* chosen = &choices.back();
            for (const auto& c : choices) {
                if (c.action->weight <= 0.0) continue;
                if (pick < c.action->weight) {
                    chosen = &c;
                    break;
                }
                pick -= c.action->weight;
            }
            const auto dur = to_us(rng.uniform(chosen->action->duration_s.min, chosen->action->duration_s.max));
            const int steps = static_cast<int>(chosen->action->steps.size());
            out.push_back({t, dev.device_id, chosen->app->app_name, chosen->action->action_name, Outcome::success, dur,
                           steps, steps, false});
            first_end.try_emplace(chosen->app->app_name, t + dur);
            t += dur + to_us(rng.uniform(config.idle_s.min, config.idle_s.max));
        }

        Rng poll_rng(derive_seed(config.seed, kStreamPolls + di));
        for (const auto& name : dev.installed_apps) {
            const AppModel* app = find_app(config, name);
            const auto it = first_end.find(name);
            if (!app->background_poll_period_s || it == first_end.end()) continue;
            const double period = *app->background_poll_period_s;
            const int steps = static_cast<int>(app->background_poll.size());
            std::int64_t p = it->second + to_us(period * poll_rng.uniform(0.9, 1.1));
            while (p < end_us) {
                out.push_back({p, dev.device_id, app->app_name, "Background Poll", Outcome::success, 0, steps, steps,
                               true});
                p += to_us(period * poll_rng.uniform(0.9, 1.1));
            }
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ActionRecord& a, const ActionRecord& b) {
        return std::tie(a.ts_us, a.device_id) < std::tie(b.ts_us, b.device_id);
    });
    return out;
}

std::vector<ActionRecord> inject_failures(std::span<const ActionRecord> schedule,
                                          std::span<const FailureRate> failure_rates, std::uint64_t seed)
{
    std::map<std::pair<std::string, std::string>, const FailureRate*> rates;
    for (const auto& f : failure_rates) rates[{f.device_id, f.app_name}] = &f;

    Rng rng(derive_seed(seed, kStreamFailures));
    std::vector<ActionRecord> out(schedule.begin(), schedule.end());
    for (auto& rec : out) {
        if (rec.background) continue;
        const auto it = rates.find({rec.device_id, rec.app_name});
        const double lf = it == rates.end() ? 0.0 : it->second->lf_prob;
        const double ef = it == rates.end() ? 0.0 : it->second->ef_prob;
        // Both draws are always consumed so one pair's rates never shift
        // another pair's outcomes.
        const double u1 = rng.uniform01();
        const double u2 = rng.uniform01();
        const auto cut = rng.uniform_int(0, std::max(0, rec.total_steps - 1));
        if (u1 < lf) {
            rec.outcome = Outcome::launch_failure;
            rec.steps_executed = 0;
        } else if (u2 < ef) {
            rec.outcome = Outcome::execution_failure;
            rec.steps_executed = static_cast<int>(cut);
        } else {
            rec.outcome = Outcome::success;
            rec.steps_executed = rec.total_steps;
        }
    }
    return out;
}

ScenarioOutput run_scenario(const ScenarioConfig& config)
{
    validate(config);
    const auto records =
        inject_failures(schedule_actions(config), config.failure_rates, derive_seed(config.seed, kStreamScenarioFailures));

    std::map<std::string, std::size_t> device_index;
    std::vector<PortAllocator> ports;
    for (std::size_t di = 0; di < config.devices.size(); ++di) {
        device_index[config.devices[di].device_id] = di;
        ports.emplace_back(derive_seed(config.seed, kStreamPorts + di), config.port_reuse_prob,
                           config.port_reuse_min_gap_s);
    }

    ScenarioOutput out;
    std::map<std::pair<std::string, std::string>, std::int64_t> first_launch;  // earliest non-LF start
    std::map<FlowKey, int> episodes;
    const std::int64_t poll_us = to_us(config.socket_poll_interval_s);

    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& rec = records[i];
        if (!rec.background) out.run_log.push_back(rec);
        const auto pair = std::make_pair(rec.device_id, rec.app_name);
        if (!rec.background && rec.outcome != Outcome::launch_failure) first_launch.try_emplace(pair, rec.ts_us);
        if (rec.background) {
            // Apps only poll once they have been opened successfully.
            const auto it = first_launch.find(pair);
            if (it == first_launch.end() || it->second >= rec.ts_us) continue;
        }
        if (rec.steps_executed <= 0) continue;

        const std::size_t di = device_index.at(rec.device_id);
        const auto& dev = config.devices[di];
        const AppModel& app = *find_app(config, rec.app_name);
        std::span<const TrafficBurst> steps;
        if (rec.background) {
            steps = app.background_poll;
        } else {
            const auto act = std::find_if(app.actions.begin(), app.actions.end(),
                                          [&](const ActionModel& a) { return a.action_name == rec.action_name; });
            steps = std::span<const TrafficBurst>(act->steps).first(static_cast<std::size_t>(rec.steps_executed));
        }

        Rng rng(derive_seed(config.seed, kStreamTraffic + i));
        const std::int64_t t0 = rec.ts_us + rng.uniform_int(0, 200'000);
        const Endpoint& ep = app.server_endpoints[rng.index(app.server_endpoints.size())];
        const auto remote_ttl = static_cast<std::uint8_t>(rng.uniform_int(config.remote_ttl.min, config.remote_ttl.max));
        const auto timeline = realize_traffic(app, steps, config, t0, rng);
        if (timeline.empty()) continue;

        const std::int64_t first = timeline.front().ts_us;
        const std::int64_t last = timeline.back().ts_us;
        const std::uint16_t port = ports[di].allocate(first, last);

        const bool tcp = app.protocol == kProtoTcp;
        for (const auto& e : timeline) {
            PacketRecord p;
            p.ts_us = e.ts_us;
            p.protocol = app.protocol;
            if (e.up) {
                p.src_mac = dev.mac;
                p.dst_mac = config.gateway_mac;
                p.src_ip = dev.local_ip;
                p.dst_ip = ep.ip;
                p.src_port = port;
                p.dst_port = ep.port;
                p.ttl = dev.ttl_default;
            } else {
                p.src_mac = config.gateway_mac;
                p.dst_mac = dev.mac;
                p.src_ip = ep.ip;
                p.dst_ip = dev.local_ip;
                p.src_port = ep.port;
                p.dst_port = port;
                p.ttl = remote_ttl;
            }
            p.ip_total_len = e.len;
            if (tcp) {
                p.tcp_flags = e.flags;
                p.tcp_window = e.window;
                p.tcp_options = e.options;
            }
            p.payload_len = static_cast<std::uint16_t>(e.len - 20 - l4_header_len(p));
            out.packets.push_back(p);
        }

        const SocketOwner owner = owner_for(config, dev, app);
        auto event = [&](std::int64_t ts, SocketEventKind kind) {
            out.socket_events.push_back(
                {ts, dev.device_id, kind, app.protocol, dev.local_ip, port, ep.ip, ep.port, owner});
        };
        event(first, SocketEventKind::open);
        for (std::int64_t t = first + poll_us; t < last; t += poll_us) event(t, SocketEventKind::poll);
        event(last, SocketEventKind::close);

        const FlowKey key = canonical_key(dev.local_ip, port, ep.ip, ep.port, app.protocol);
        out.truth.push_back({key, episodes[key]++, first, last, app.app_name, dev.os, dev.device_id});
    }

    std::stable_sort(out.packets.begin(), out.packets.end(),
                     [](const PacketRecord& a, const PacketRecord& b) { return a.ts_us < b.ts_us; });
    std::stable_sort(out.socket_events.begin(), out.socket_events.end(),
                     [](const SocketEvent& a, const SocketEvent& b) { return a.ts_us < b.ts_us; });
    return out;
}

}  // namespace flowforge::testbed

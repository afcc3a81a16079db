#include "flowforge/testbed.hpp"

namespace flowforge::testbed {

namespace {

struct Range {
    std::int64_t lo;
    std::int64_t hi;
};

// Gaps are given in milliseconds for readability.
TrafficBurst burst(BurstDirection dir, Range count, Range len, Range gap_ms, Range lead_ms, std::uint16_t window)
{
    TrafficBurst b;
    b.direction = dir;
    b.pkt_count = {count.lo, count.hi};
    b.pkt_len = {len.lo, len.hi};
    b.inter_pkt_gap_us = {gap_ms.lo * 1000, gap_ms.hi * 1000};
    b.lead_gap_us = {lead_ms.lo * 1000, lead_ms.hi * 1000};
    b.tcp_window_base = window;
    return b;
}

TrafficBurst up(Range count, Range len, Range gap_ms, Range lead_ms, std::uint16_t window)
{
    return burst(BurstDirection::up, count, len, gap_ms, lead_ms, window);
}

TrafficBurst down(Range count, Range len, Range gap_ms, Range lead_ms, std::uint16_t window)
{
    return burst(BurstDirection::down, count, len, gap_ms, lead_ms, window);
}

Endpoint ep(const char* ip, std::uint16_t port) { return {Ipv4Address::parse(ip), port}; }

AppModel app_model(std::string name, std::vector<Os> os, std::vector<Endpoint> endpoints, std::uint8_t protocol)
{
    AppModel a;
    a.app_name = std::move(name);
    a.os_availability = std::move(os);
    a.server_endpoints = std::move(endpoints);
    a.protocol = protocol;
    return a;
}

const std::vector<Os> kBoth = {Os::android, Os::ios};

// Shared by several Google apps, and by several Meta apps, so that 5-tuples
// of different apps can only be told apart by their local port.
const char* const kGoogleFrontend = "142.250.70.238";
const char* const kMetaEdge = "157.240.8.35";

AppModel chrome()
{
    const std::uint16_t w = 65535, s = 62727;
    AppModel a = app_model("Chrome", {Os::android}, {ep(kGoogleFrontend, 443), ep("93.184.216.34", 443)}, kProtoTcp);
    a.actions.push_back({"Browser Search", 1.0,
                         {up({2, 5}, {300, 700}, {5, 40}, {0, 0}, w), down({15, 50}, {900, 1500}, {1, 8}, {20, 120}, s),
                          up({1, 3}, {80, 200}, {5, 30}, {100, 400}, w), down({8, 30}, {500, 1500}, {1, 10}, {20, 150}, s),
                          up({2, 6}, {200, 500}, {10, 50}, {2000, 8000}, w),
                          down({20, 60}, {900, 1500}, {1, 6}, {30, 100}, s)},
                         {20.0, 45.0}});
    return a;
}

AppModel safari()
{
    const std::uint16_t w = 65535, s = 62727;
    AppModel a = app_model("Safari", {Os::ios}, {ep("17.253.144.10", 443), ep("93.184.216.34", 443)}, kProtoTcp);
    a.actions.push_back({"Browser Search", 1.0,
                         {up({2, 4}, {350, 800}, {5, 40}, {0, 0}, w), down({12, 45}, {900, 1500}, {1, 8}, {20, 120}, s),
                          up({1, 3}, {90, 220}, {5, 30}, {100, 400}, w), down({6, 28}, {500, 1500}, {1, 10}, {20, 150}, s),
                          up({2, 6}, {250, 600}, {10, 50}, {2000, 8000}, w),
                          down({18, 55}, {900, 1500}, {1, 6}, {30, 100}, s)},
                         {20.0, 45.0}});
    a.ios_process = "MobileSafari";
    return a;
}

AppModel gmail()
{
    const std::uint16_t w = 29200, s = 60192;
    AppModel a = app_model("Gmail", {Os::android}, {ep(kGoogleFrontend, 443)}, kProtoTcp);
    a.actions.push_back({"Mail Send", 1.0,
                         {up({1, 2}, {300, 600}, {5, 20}, {0, 0}, w), down({1, 3}, {100, 300}, {2, 20}, {20, 80}, s),
                          up({8, 25}, {1000, 1500}, {1, 5}, {200, 800}, w), down({2, 5}, {60, 200}, {2, 20}, {20, 80}, s)},
                         {15.0, 30.0}});
    a.actions.push_back({"Mail Update", 1.0,
                         {up({1, 3}, {100, 350}, {5, 20}, {0, 0}, w), down({2, 12}, {300, 1400}, {1, 10}, {20, 100}, s)},
                         {5.0, 15.0}});
    a.background_poll_period_s = 300.0;
    a.background_poll = {up({1, 2}, {120, 260}, {5, 20}, {0, 0}, w), down({1, 3}, {150, 450}, {2, 20}, {20, 80}, s)};
    return a;
}

AppModel apple_mail()
{
    const std::uint16_t w = 32768, s = 28960;
    AppModel a = app_model("Apple Mail", {Os::ios}, {ep("17.42.251.41", 993)}, kProtoTcp);
    a.actions.push_back({"Mail Send", 1.0,
                         {up({2, 3}, {120, 400}, {5, 20}, {0, 0}, w), down({1, 3}, {80, 250}, {2, 20}, {20, 80}, s),
                          up({10, 30}, {900, 1500}, {1, 5}, {200, 800}, w), down({2, 4}, {70, 180}, {2, 20}, {20, 80}, s)},
                         {15.0, 30.0}});
    a.actions.push_back({"Mail Update", 1.0,
                         {up({2, 4}, {90, 300}, {5, 20}, {0, 0}, w), down({3, 15}, {250, 1300}, {1, 10}, {20, 100}, s)},
                         {5.0, 15.0}});
    a.background_poll_period_s = 300.0;
    a.background_poll = {up({2, 3}, {90, 200}, {5, 20}, {0, 0}, w), down({1, 2}, {100, 300}, {2, 20}, {20, 80}, s)};
    a.ios_process = "MobileMail";
    return a;
}

AppModel messenger()
{
    const std::uint16_t w = 14600, s = 65160;
    AppModel a = app_model("Messenger", kBoth, {ep(kMetaEdge, 443), ep("157.240.8.19", 443)}, kProtoTcp);
    a.actions.push_back({"Message Send", 1.0,
                         {up({1, 3}, {150, 400}, {5, 30}, {0, 0}, w), down({1, 2}, {80, 150}, {5, 30}, {20, 100}, s),
                          up({1, 2}, {100, 250}, {5, 30}, {500, 2000}, w), down({1, 3}, {80, 200}, {5, 30}, {20, 100}, s)},
                         {8.0, 20.0}});
    a.actions.push_back({"Message Update", 1.0,
                         {up({1, 2}, {90, 200}, {5, 30}, {0, 0}, w), down({2, 8}, {150, 900}, {2, 20}, {20, 100}, s)},
                         {4.0, 10.0}});
    a.background_poll_period_s = 180.0;
    a.background_poll = {up({1, 1}, {80, 140}, {5, 20}, {0, 0}, w), down({1, 2}, {80, 160}, {2, 20}, {20, 80}, s)};
    a.ios_process = "Messenger";
    return a;
}

AppModel whatsapp()
{
    const std::uint16_t w = 16384, s = 64240;
    AppModel a = app_model("WhatsApp", kBoth, {ep("157.240.8.53", 5222)}, kProtoTcp);
    a.actions.push_back({"Message Send", 1.0,
                         {up({1, 2}, {110, 300}, {5, 30}, {0, 0}, w), down({1, 2}, {70, 120}, {5, 30}, {20, 100}, s),
                          up({1, 2}, {90, 200}, {5, 30}, {500, 2000}, w), down({1, 2}, {70, 130}, {5, 30}, {20, 100}, s)},
                         {8.0, 20.0}});
    a.actions.push_back({"Message Update", 1.0,
                         {up({1, 2}, {70, 150}, {5, 30}, {0, 0}, w), down({2, 6}, {120, 700}, {2, 20}, {20, 100}, s)},
                         {4.0, 10.0}});
    a.background_poll_period_s = 120.0;
    a.background_poll = {up({1, 1}, {60, 90}, {5, 20}, {0, 0}, w), down({1, 1}, {60, 90}, {2, 20}, {20, 80}, s)};
    a.ios_process = "WhatsApp";
    return a;
}

AppModel google_maps()
{
    AppModel a = app_model("Google Maps", {Os::android}, {ep(kGoogleFrontend, 443)}, kProtoUdp);
    a.actions.push_back({"Map Search", 1.0,
                         {up({2, 6}, {200, 600}, {5, 30}, {0, 0}, 0), down({40, 150}, {1100, 1350}, {1, 15}, {20, 100}, 0),
                          up({1, 4}, {100, 300}, {5, 30}, {1000, 4000}, 0),
                          down({20, 80}, {1100, 1350}, {1, 15}, {20, 100}, 0)},
                         {20.0, 50.0}});
    return a;
}

AppModel apple_maps()
{
    const std::uint16_t w = 40960, s = 54320;
    AppModel a = app_model("Apple Maps", {Os::ios}, {ep("17.253.144.10", 443)}, kProtoTcp);
    a.actions.push_back({"Map Search", 1.0,
                         {up({2, 5}, {250, 650}, {5, 30}, {0, 0}, w), down({30, 120}, {1000, 1500}, {1, 15}, {20, 100}, s),
                          up({1, 3}, {120, 300}, {5, 30}, {1000, 4000}, w),
                          down({15, 70}, {1000, 1500}, {1, 15}, {20, 100}, s)},
                         {20.0, 50.0}});
    a.ios_process = "Maps";
    return a;
}

AppModel spotify()
{
    const std::uint16_t w = 43690, s = 65535;
    AppModel a = app_model("Spotify", kBoth, {ep("35.186.224.25", 443)}, kProtoTcp);
    a.actions.push_back({"Music Search", 1.0,
                         {up({2, 4}, {200, 500}, {5, 30}, {0, 0}, w), down({5, 20}, {200, 1200}, {2, 20}, {20, 100}, s),
                          up({1, 2}, {150, 300}, {5, 30}, {500, 2000}, w),
                          down({250, 450}, {1300, 1500}, {20, 250}, {50, 200}, s)},
                         {180.0, 240.0}});
    a.ios_process = "Spotify";
    return a;
}

AppModel soundcloud()
{
    const std::uint16_t w = 26883, s = 31856;
    AppModel a = app_model("SoundCloud", kBoth, {ep("54.230.130.88", 443)}, kProtoTcp);
    a.actions.push_back({"Music Search", 1.0,
                         {up({2, 5}, {180, 450}, {5, 30}, {0, 0}, w), down({4, 15}, {300, 1300}, {2, 20}, {20, 100}, s),
                          up({1, 2}, {120, 260}, {5, 30}, {500, 2000}, w),
                          down({150, 300}, {1000, 1500}, {30, 300}, {50, 200}, s)},
                         {150.0, 210.0}});
    a.ios_process = "SoundCloud";
    return a;
}

AppModel youtube()
{
    AppModel a = app_model("YouTube", kBoth, {ep("173.194.150.70", 443), ep("173.194.150.102", 443)}, kProtoUdp);
    a.actions.push_back({"YouTube Search", 0.5,
                         {up({2, 5}, {300, 800}, {5, 30}, {0, 0}, 0), down({20, 60}, {1200, 1350}, {1, 10}, {20, 100}, 0),
                          up({2, 4}, {150, 400}, {5, 30}, {500, 2000}, 0),
                          down({3000, 3800}, {1250, 1350}, {120, 180}, {50, 200}, 0)},
                         {600.0, 660.0}});
    a.ios_process = "YouTube";
    return a;
}

AppModel social(const char* name, const char* process, std::vector<Endpoint> endpoints, std::uint16_t w,
                std::uint16_t s, Range media_count, Range media_len)
{
    AppModel a = app_model(name, kBoth, std::move(endpoints), kProtoTcp);
    a.actions.push_back({"Feed Update", 1.0,
                         {up({2, 5}, {200, 600}, {5, 30}, {0, 0}, w),
                          down(media_count, media_len, {1, 8}, {20, 100}, s), up({1, 3}, {100, 300}, {5, 30}, {1000, 5000}, w),
                          down({media_count.lo / 2, media_count.hi / 2}, media_len, {1, 8}, {20, 100}, s)},
                         {15.0, 40.0}});
    a.ios_process = process;
    return a;
}

DeviceProfile device(const char* id, const char* model, Os os, const char* version, const char* ip, const char* mac,
                     std::vector<std::string> apps)
{
    DeviceProfile d;
    d.device_id = id;
    d.model = model;
    d.os = os;
    d.os_version = version;
    d.local_ip = Ipv4Address::parse(ip);
    d.mac = MacAddress::parse(mac);
    d.installed_apps = std::move(apps);
    return d;
}

}  // namespace

ScenarioConfig default_scenario()
{
    ScenarioConfig c;
    c.subnet = Cidr::parse("192.168.1.0/24");
    c.gateway_mac = MacAddress::parse("02:00:5e:10:00:01");
    c.seed = 42;

    c.apps = {chrome(),
              safari(),
              gmail(),
              apple_mail(),
              messenger(),
              whatsapp(),
              google_maps(),
              apple_maps(),
              spotify(),
              soundcloud(),
              youtube(),
              social("Instagram", "Instagram", {ep(kMetaEdge, 443), ep("157.240.8.174", 443)}, 50400, 65483,
                     {60, 200}, {1000, 1500}),
              social("Twitter", "Twitter", {ep("104.244.42.1", 443), ep("104.244.42.129", 443)}, 57344, 50640,
                     {20, 80}, {300, 1400}),
              social("Snapchat", "Snapchat", {ep("35.190.43.134", 443)}, 22400, 56800, {40, 150}, {800, 1500}),
              social("Facebook", "Facebook", {ep(kMetaEdge, 443)}, 47104, 62920, {30, 120}, {600, 1500})};

    const std::vector<std::string> android_apps = {"Chrome",  "Gmail",      "Messenger", "WhatsApp",
                                                   "Google Maps", "Spotify", "SoundCloud", "YouTube",
                                                   "Instagram", "Twitter",  "Snapchat",  "Facebook"};
    const std::vector<std::string> ios_apps = {"Safari",  "Apple Mail", "Messenger", "WhatsApp",
                                               "Apple Maps", "Spotify", "SoundCloud", "YouTube",
                                               "Instagram", "Twitter",  "Snapchat",  "Facebook"};
    c.devices = {
        device("moto-g4", "Motorola Moto G4", Os::android, "7.0", "192.168.1.11", "02:00:5e:10:00:11", android_apps),
        device("samsung-s9", "Samsung Galaxy S9", Os::android, "8.0", "192.168.1.12", "02:00:5e:10:00:12",
               android_apps),
        device("huawei", "Huawei", Os::android, "9", "192.168.1.13", "02:00:5e:10:00:13", android_apps),
        device("iphone-6", "Apple iPhone 6", Os::ios, "11.3.1", "192.168.1.14", "02:00:5e:10:00:14", ios_apps),
        device("iphone-7", "Apple iPhone 7", Os::ios, "13.3.1", "192.168.1.15", "02:00:5e:10:00:15", ios_apps),
    };

    // Pairs not listed never fail.
    c.failure_rates = {
        {"iphone-6", "Apple Mail", 0.0125, 0.0},  {"iphone-6", "Messenger", 0.0196, 0.0},
        {"iphone-6", "Instagram", 0.0241, 0.0},   {"iphone-6", "SoundCloud", 0.0323, 0.0},
        {"iphone-6", "WhatsApp", 0.0028, 0.0},    {"iphone-6", "Twitter", 0.0, 0.10},
        {"iphone-6", "Apple Maps", 0.0, 0.014},   {"iphone-7", "Apple Mail", 0.0056, 0.0},
        {"iphone-7", "Facebook", 0.006, 0.0},     {"iphone-7", "Messenger", 0.0028, 0.0},
        {"iphone-7", "WhatsApp", 0.0033, 0.0},    {"iphone-7", "Twitter", 0.0, 0.14},
        {"moto-g4", "YouTube", 0.0, 0.08},        {"moto-g4", "SoundCloud", 0.0, 0.05},
        {"samsung-s9", "YouTube", 0.0, 0.08},     {"samsung-s9", "SoundCloud", 0.0, 0.05},
    };
    return c;
}

}  // namespace flowforge::testbed

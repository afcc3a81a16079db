#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <json.hpp>

#include "flowforge/error.hpp"
#include "flowforge/features.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace flowforge;

namespace {

const Cidr kSubnet = Cidr::parse("10.0.0.0/24");

PacketRecord tcp(std::int64_t ts, bool outbound, std::uint16_t len, std::uint8_t ttl, std::uint8_t flags,
                 std::uint16_t window)
{
    PacketRecord p;
    p.ts_us = ts;
    p.src_mac = MacAddress::parse(outbound ? "02:00:00:00:00:05" : "02:00:00:00:00:01");
    p.dst_mac = MacAddress::parse(outbound ? "02:00:00:00:00:01" : "02:00:00:00:00:05");
    p.src_ip = Ipv4Address::parse(outbound ? "10.0.0.5" : "93.184.0.1");
    p.dst_ip = Ipv4Address::parse(outbound ? "93.184.0.1" : "10.0.0.5");
    p.src_port = outbound ? 50123 : 443;
    p.dst_port = outbound ? 443 : 50123;
    p.protocol = kProtoTcp;
    p.ttl = ttl;
    p.tcp_flags = flags;
    p.tcp_window = window;
    p.ip_total_len = len;
    p.payload_len = static_cast<std::uint16_t>(len - 40);
    return p;
}

Flow handshake_flow()
{
    using namespace tcp_flag;
    std::vector<PacketRecord> pk = {
        tcp(1'000'000, true, 60, 64, syn, 65535),
        tcp(1'020'000, false, 60, 57, syn | ack, 62727),
        tcp(1'030'000, true, 52, 64, ack, 65535),
        tcp(1'100'000, true, 500, 64, psh | ack, 65535),
        tcp(1'300'000, false, 1500, 57, psh | ack, 62727),
        tcp(1'500'000, false, 1000, 58, psh | ack | fin, 62727),
    };
    pk[0].tcp_options = tcp_option::mss | tcp_option::window_scale;
    pk[0].payload_len = 0;
    auto flows = assemble_flows(pk, kSubnet);
    REQUIRE(flows.size() == 1);
    return flows.front();
}

}  // namespace

TEST_CASE("feature layout has 20 numerical and 16 categorical columns")
{
    CHECK(numerical_feature_names().size() == 20);
    CHECK(categorical_feature_names().size() == 16);
    CHECK(numerical_feature_names()[static_cast<std::size_t>(Num::byte_ratio)] == "byte_ratio");
    CHECK(numerical_feature_names()[dir_block_start(Side::remote) + 8] == "remote_ttl_mode");
    CHECK(categorical_feature_names()[static_cast<std::size_t>(Cat::l4_service)] == "l4_service");
}

TEST_CASE("schema file lists the same columns in the same order")
{
    std::ifstream in(std::string(FLOWFORGE_SOURCE_DIR) + "/schema/features_v1.json");
    REQUIRE(in);
    const auto schema = nlohmann::json::parse(in);
    CHECK(schema.at("schema_version") == kSchemaVersion);
    REQUIRE(schema.at("numerical").size() == kNumericalCount);
    REQUIRE(schema.at("categorical").size() == kCategoricalCount);
    for (std::size_t i = 0; i < kNumericalCount; ++i) {
        CHECK(schema["numerical"][i].at("name").get<std::string>() == numerical_feature_names()[i]);
        CHECK(schema["numerical"][i].contains("unit"));
    }
    for (std::size_t i = 0; i < kCategoricalCount; ++i) {
        CHECK(schema["categorical"][i].at("name").get<std::string>() == categorical_feature_names()[i]);
    }
}

TEST_CASE("hand-computed flow")
{
    const FeatureVector fv = extract_features(handshake_flow());
    CHECK(fv[Num::duration_s] == doctest::Approx(0.5));
    CHECK(fv[Num::local_pkt_count] == 3);
    CHECK(fv[Num::local_byte_count] == 612);
    CHECK(fv[Num::local_pkt_len_min] == 52);
    CHECK(fv[Num::local_pkt_len_max] == 500);
    CHECK(fv[Num::local_pkt_len_mean] == doctest::Approx(204.0));
    // population std of {60, 52, 500}
    CHECK(fv[Num::local_pkt_len_std] == doctest::Approx(209.3290870));
    CHECK(fv[Num::local_iat_mean_s] == doctest::Approx(0.05));
    CHECK(fv[Num::local_tcp_init_win] == 65535);
    CHECK(fv[Num::local_ttl_mode] == 64);
    CHECK(fv[Num::remote_pkt_count] == 3);
    CHECK(fv[Num::remote_byte_count] == 2560);
    CHECK(fv[Num::remote_iat_mean_s] == doctest::Approx(0.24));
    CHECK(fv[Num::remote_tcp_init_win] == 62727);
    // 57, 57, 58: mode 57
    CHECK(fv[Num::remote_ttl_mode] == 57);
    CHECK(fv[Num::byte_ratio] == doctest::Approx(612.0 / 3172.0));

    CHECK(fv[Cat::protocol] == "6");
    CHECK(fv[Cat::local_ip] == "10.0.0.5");
    CHECK(fv[Cat::remote_ip] == "93.184.0.1");
    CHECK(fv[Cat::local_port] == "50123");
    CHECK(fv[Cat::remote_port] == "443");
    CHECK(fv[Cat::local_mac] == "02:00:00:00:00:05");
    CHECK(fv[Cat::remote_mac] == "02:00:00:00:00:01");
    CHECK(fv[Cat::local_tcp_flags] == "SPA");
    CHECK(fv[Cat::remote_tcp_flags] == "FSPA");
    CHECK(fv[Cat::local_tcp_options] == "mss+ws");
    CHECK(fv[Cat::remote_tcp_options] == "none");
    CHECK(fv[Cat::first_pkt_direction] == "local");
    CHECK(fv[Cat::vlan_id] == "none");
    CHECK(fv[Cat::local_dscp] == "0");
    CHECK(fv[Cat::l4_service] == "https");
}

TEST_CASE("one-sided flow leaves the silent direction at zero")
{
    std::vector<PacketRecord> pk = {tcp(0, false, 100, 50, tcp_flag::ack, 0)};
    pk[0].tcp_window.reset();
    pk[0].vlan_id = 12;
    const auto flows = assemble_flows(pk, kSubnet);
    const FeatureVector fv = extract_features(flows.front());
    for (std::size_t i = 0; i < kDirStatsFields; ++i) CHECK(fv.numerical[dir_block_start(Side::local) + i] == 0.0);
    CHECK(fv[Num::remote_pkt_count] == 1);
    CHECK(fv[Num::remote_iat_mean_s] == 0.0);
    CHECK(fv[Num::remote_tcp_init_win] == 0.0);
    CHECK(fv[Num::byte_ratio] == 0.0);
    CHECK(fv[Cat::first_pkt_direction] == "remote");
    CHECK(fv[Cat::local_port] == "50123");
    CHECK(fv[Cat::local_mac] == "02:00:00:00:00:05");
    CHECK(fv[Cat::local_tcp_flags] == "");
    CHECK(fv[Cat::local_dscp] == "none");
    CHECK(fv[Cat::vlan_id] == "12");
}

TEST_CASE("ttl mode ties resolve to the smaller value")
{
    std::vector<PacketRecord> pk = {tcp(0, true, 60, 128, 0, 1), tcp(1, true, 60, 64, 0, 1),
                                    tcp(2, true, 60, 64, 0, 1), tcp(3, true, 60, 128, 0, 1)};
    CHECK(summarize_direction(pk).ttl_mode == 64);
    CHECK(summarize_direction({}) == DirStats{});
}

TEST_CASE("service guess uses the lower well-known port")
{
    CHECK(l4_service_guess(50000, 443) == "https");
    CHECK(l4_service_guess(53, 40000) == "domain");
    CHECK(l4_service_guess(993, 50000) == "imaps");
    CHECK(l4_service_guess(5222, 50000) == "unregistered");
    CHECK(l4_service_guess(1000, 443) == "https");
    CHECK(l4_service_guess(999, 1000) == "unregistered");
}

TEST_CASE("empty flow is an error")
{
    Flow f;
    CHECK_THROWS_AS(extract_features(f), DataError);
}

TEST_CASE("numerical features agree with a long-double recomputation")
{
    Rng rng(derive_seed(11, 1));
    std::size_t checked = 0;
    for (int round = 0; round < 30; ++round) {
        const auto pk = testgen::random_packet_set(rng, {1000, 30, 60.0});
        for (const auto& f : assemble_flows(pk, kSubnet)) {
            const auto got = extract_features(f).numerical;
            const auto want = oracle::recompute_numerical(f);
            for (std::size_t i = 0; i < kNumericalCount; ++i) {
                INFO(numerical_feature_names()[i]);
                CHECK(oracle::close_rel(got[i], want[i], 1e-9));
            }
            ++checked;
        }
    }
    CHECK(checked > 300);
}

TEST_CASE("numerical matrix follows dataset order")
{
    std::vector<FeatureVector> rows(3);
    for (std::size_t r = 0; r < 3; ++r) rows[r][Num::duration_s] = static_cast<double>(r);
    const auto m = numerical_matrix(rows);
    CHECK(m.values.rows() == 3);
    CHECK(m.values.cols() == kNumericalCount);
    CHECK(m.values(2, 0) == 2.0);
    CHECK(m.column_names.front() == "duration_s");
}

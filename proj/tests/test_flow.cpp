#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "flowforge/error.hpp"
#include "flowforge/flow.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace flowforge;

namespace {

const Cidr kSubnet = Cidr::parse("10.0.0.0/24");

PacketRecord udp(std::int64_t ts, const char* src, std::uint16_t sp, const char* dst, std::uint16_t dp)
{
    PacketRecord p;
    p.ts_us = ts;
    p.src_ip = Ipv4Address::parse(src);
    p.dst_ip = Ipv4Address::parse(dst);
    p.protocol = kProtoUdp;
    p.src_port = sp;
    p.dst_port = dp;
    p.ttl = 64;
    p.ip_total_len = 28;
    return p;
}

void require_same(const std::vector<Flow>& got, const std::vector<Flow>& want)
{
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        INFO("flow " << i << " " << want[i].key.to_string());
        CHECK(oracle::same_flow(got[i], want[i]));
    }
}

}  // namespace

TEST_CASE("canonical key is direction independent")
{
    const auto fwd = udp(0, "10.0.0.5", 5000, "93.184.0.1", 53);
    const auto rev = udp(0, "93.184.0.1", 53, "10.0.0.5", 5000);
    const auto [kf, df] = canonical_key(fwd);
    const auto [kr, dr] = canonical_key(rev);
    CHECK(kf == kr);
    CHECK(df != dr);
    CHECK(kf.ip_a == Ipv4Address::parse("10.0.0.5"));

    // Same address on both sides: the port decides.
    const auto self = canonical_key(udp(0, "10.0.0.1", 9, "10.0.0.1", 7));
    CHECK(self.first.port_a == 7);
    CHECK(self.second == KeyDirection::b_to_a);
    CHECK(canonical_key(udp(0, "10.0.0.1", 7, "10.0.0.1", 7)).second == KeyDirection::a_to_b);
}

TEST_CASE("idle gap exactly at the timeout stays in the flow")
{
    const std::int64_t t = 60'000'000;
    std::vector<PacketRecord> pk = {udp(0, "10.0.0.5", 5000, "93.184.0.1", 53),
                                    udp(t, "93.184.0.1", 53, "10.0.0.5", 5000)};
    auto flows = assemble_flows(pk, kSubnet, 60.0);
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].packet_count() == 2);
    CHECK(flows[0].duration_s() == 60.0);

    pk[1].ts_us = t + 1;
    flows = assemble_flows(pk, kSubnet, 60.0);
    REQUIRE(flows.size() == 2);
    CHECK(flows[0].epoch == 0);
    CHECK(flows[1].epoch == 1);
    CHECK(flows[1].first_pkt_direction == Side::remote);
    CHECK(flows[1].local_ip == Ipv4Address::parse("10.0.0.5"));
}

TEST_CASE("timeout is measured from the last packet, not the first")
{
    std::vector<PacketRecord> pk;
    for (int i = 0; i < 10; ++i) pk.push_back(udp(i * 50'000'000LL, "10.0.0.5", 5000, "93.184.0.1", 53));
    const auto flows = assemble_flows(pk, kSubnet, 60.0);
    REQUIRE(flows.size() == 1);
    CHECK(flows[0].local_packets.size() == 10);
}

TEST_CASE("scopes")
{
    std::vector<PacketRecord> pk = {udp(0, "10.0.0.5", 1, "93.184.0.1", 2), udp(1, "93.184.0.1", 3, "10.0.0.6", 4),
                                    udp(2, "10.0.0.7", 5, "10.0.0.8", 6), udp(3, "93.184.0.2", 7, "93.184.0.3", 8)};
    const auto flows = assemble_flows(pk, kSubnet);
    REQUIRE(flows.size() == 4);
    CHECK(flows[0].scope == FlowScope::normal);
    CHECK(flows[0].first_pkt_direction == Side::local);
    CHECK(flows[1].scope == FlowScope::normal);
    CHECK(flows[1].local_ip == Ipv4Address::parse("10.0.0.6"));
    CHECK(flows[1].first_pkt_direction == Side::remote);
    CHECK(flows[2].scope == FlowScope::internal);
    CHECK(flows[2].local_ip == Ipv4Address::parse("10.0.0.7"));
    CHECK(flows[3].scope == FlowScope::foreign);
}

TEST_CASE("protocol separates otherwise equal tuples")
{
    auto a = udp(0, "10.0.0.5", 1, "93.184.0.1", 2);
    auto b = a;
    b.protocol = kProtoTcp;
    b.ip_total_len = 40;
    const std::vector<PacketRecord> pk = {a, b};
    CHECK(assemble_flows(pk, kSubnet).size() == 2);
}

TEST_CASE("non-positive timeout is rejected")
{
    const std::vector<PacketRecord> pk;
    CHECK_THROWS_AS(assemble_flows(pk, kSubnet, 0.0), ConfigError);
    CHECK(assemble_flows(pk, kSubnet).empty());
}

TEST_CASE("matches the brute-force partitioner on random packet sets")
{
    Rng rng(derive_seed(7, 1));
    for (int round = 0; round < 60; ++round) {
        const double timeout = round % 3 == 0 ? 5.0 : 60.0;
        const auto pk = testgen::random_packet_set(rng, {1500, 30, timeout});
        INFO("round " << round);
        require_same(assemble_flows(pk, kSubnet, timeout), oracle::partition_flows(pk, kSubnet, timeout));
    }
}

TEST_CASE("flows do not depend on input order")
{
    Rng rng(derive_seed(7, 2));
    for (int round = 0; round < 20; ++round) {
        auto pk = testgen::random_packet_set(rng, {800, 20, 60.0});
        const auto base = assemble_flows(pk, kSubnet);
        std::reverse(pk.begin(), pk.end());
        require_same(assemble_flows(pk, kSubnet), base);
        for (std::size_t i = pk.size(); i > 1; --i) std::swap(pk[i - 1], pk[rng.index(i)]);
        require_same(assemble_flows(pk, kSubnet), base);
    }
}

TEST_CASE("every packet lands in exactly one flow, inside the flow's time span")
{
    Rng rng(derive_seed(7, 3));
    for (int round = 0; round < 20; ++round) {
        const auto pk = testgen::random_packet_set(rng, {2000, 40, 60.0});
        const auto flows = assemble_flows(pk, kSubnet);
        std::size_t total = 0;
        for (const auto& f : flows) {
            total += f.packet_count();
            for (const auto* side : {&f.local_packets, &f.remote_packets}) {
                for (const auto& p : *side) {
                    CHECK(canonical_key(p).first == f.key);
                    CHECK(p.ts_us >= f.first_ts_us);
                    CHECK(p.ts_us <= f.last_ts_us);
                }
                CHECK(std::is_sorted(side->begin(), side->end(),
                                     [](const auto& a, const auto& b) { return a.ts_us < b.ts_us; }));
            }
            CHECK(f.first_packet().ts_us == f.first_ts_us);
        }
        CHECK(total == pk.size());
        for (std::size_t i = 1; i < flows.size(); ++i) CHECK(flows[i - 1].first_ts_us <= flows[i].first_ts_us);
    }
}

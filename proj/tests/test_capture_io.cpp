#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "flowforge/error.hpp"
#include "flowforge/pcap.hpp"
#include "support/generators.hpp"
#include "support/tempdir.hpp"

using namespace flowforge;
using testutil::TempDir;

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void swap32_at(std::vector<std::uint8_t>& b, std::size_t at) { std::reverse(b.begin() + at, b.begin() + at + 4); }
void swap16_at(std::vector<std::uint8_t>& b, std::size_t at) { std::swap(b[at], b[at + 1]); }

std::uint32_t le32(const std::vector<std::uint8_t>& b, std::size_t at)
{
    return std::uint32_t{b[at]} | std::uint32_t{b[at + 1]} << 8 | std::uint32_t{b[at + 2]} << 16 |
           std::uint32_t{b[at + 3]} << 24;
}

void put_le32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

PacketRecord tcp_packet()
{
    PacketRecord p;
    p.ts_us = 1'577'836'800'123'456;
    p.src_mac = MacAddress::parse("02:00:5e:10:00:11");
    p.dst_mac = MacAddress::parse("02:00:5e:10:00:01");
    p.src_ip = Ipv4Address::parse("192.168.1.11");
    p.dst_ip = Ipv4Address::parse("142.250.70.238");
    p.protocol = kProtoTcp;
    p.src_port = 50000;
    p.dst_port = 443;
    p.ttl = 64;
    p.tcp_flags = tcp_flag::syn;
    p.tcp_window = 65535;
    p.tcp_options = tcp_option::mss | tcp_option::window_scale | tcp_option::sack_permitted | tcp_option::timestamp;
    p.payload_len = 0;
    p.ip_total_len = static_cast<std::uint16_t>(20 + l4_header_len(p));
    return p;
}

}  // namespace

TEST_CASE("addresses parse and print")
{
    CHECK(Ipv4Address::parse("192.168.1.11").to_string() == "192.168.1.11");
    CHECK(Ipv4Address::parse("0.0.0.0").value() == 0u);
    CHECK(Ipv4Address::parse("255.255.255.255").value() == 0xffffffffu);
    CHECK_THROWS_AS(Ipv4Address::parse("256.1.1.1"), FormatError);
    CHECK_THROWS_AS(Ipv4Address::parse("1.2.3"), FormatError);
    CHECK_THROWS_AS(Ipv4Address::parse("1.2.3.4.5"), FormatError);
    CHECK(MacAddress::parse("aa:bb:cc:dd:ee:ff").to_string() == "aa:bb:cc:dd:ee:ff");
    CHECK_THROWS_AS(MacAddress::parse("aa:bb:cc:dd:ee"), FormatError);

    const Cidr net = Cidr::parse("192.168.1.0/24");
    CHECK(net.contains(Ipv4Address::parse("192.168.1.200")));
    CHECK_FALSE(net.contains(Ipv4Address::parse("192.168.2.1")));
    CHECK(Cidr::parse("10.1.2.3/8").to_string() == "10.0.0.0/8");
    CHECK(Cidr::parse("0.0.0.0/0").contains(Ipv4Address::parse("8.8.8.8")));
    CHECK_THROWS_AS(Cidr::parse("10.0.0.0/33"), FormatError);
    CHECK_THROWS_AS(Cidr::parse("10.0.0.0"), FormatError);
}

TEST_CASE("tcp option and header lengths")
{
    CHECK(tcp_options_len(0) == 0);
    CHECK(tcp_options_len(tcp_option::timestamp) == 12);
    CHECK(tcp_options_len(tcp_option::mss | tcp_option::window_scale | tcp_option::sack_permitted |
                          tcp_option::timestamp) == 20);
    for (int m = 0; m <= tcp_option::all; ++m) CHECK(tcp_options_len(static_cast<std::uint8_t>(m)) % 4 == 0);
    CHECK(tcp_flags_to_string(tcp_flag::syn | tcp_flag::ack) == "SA");
    CHECK(tcp_flags_to_string(0xff) == "FSRPAUEC");
    CHECK(tcp_flags_to_string(0).empty());
}

TEST_CASE("packet invariants")
{
    PacketRecord p = tcp_packet();
    CHECK(check_invariants(p).empty());
    p.tcp_flags.reset();
    CHECK_FALSE(check_invariants(p).empty());

    PacketRecord udp = tcp_packet();
    udp.protocol = kProtoUdp;
    udp.tcp_flags.reset();
    udp.tcp_window.reset();
    CHECK_FALSE(check_invariants(udp).empty());  // options on UDP
    udp.tcp_options = 0;
    CHECK(check_invariants(udp).empty());

    PacketRecord frag = udp;
    frag.frag_offset = 10;
    CHECK_FALSE(check_invariants(frag).empty());  // ports without header
    frag.src_port = frag.dst_port = 0;
    CHECK(check_invariants(frag).empty());

    PacketRecord vlan = udp;
    vlan.vlan_id = 4095;
    CHECK_FALSE(check_invariants(vlan).empty());
}

TEST_CASE("encode_frame rejects inconsistent lengths")
{
    PacketRecord p = tcp_packet();
    p.ip_total_len = 10;
    CHECK_THROWS_AS(pcap::encode_frame(p), DataError);
}

TEST_CASE("single frame decodes to the same record")
{
    const PacketRecord p = tcp_packet();
    const auto frame = pcap::encode_frame(p);
    CHECK(frame.size() == 14 + 60u);
    auto r = pcap::decode_frame(frame);
    REQUIRE(r.status == pcap::DecodeStatus::ok);
    PacketRecord back = *r.record;
    back.ts_us = p.ts_us;
    CHECK(back == p);
}

TEST_CASE("write then read reproduces random records exactly")
{
    TempDir dir("pcap_roundtrip");
    Rng rng(derive_seed(7, 1));
    for (int round = 0; round < 20; ++round) {
        std::vector<PacketRecord> packets;
        const auto n = rng.uniform_int(0, 200);
        for (std::int64_t i = 0; i < n; ++i) packets.push_back(testgen::random_packet(rng));
        const auto path = dir / "rt.pcap";
        pcap::write_capture(packets, path);
        const auto cap = pcap::read_capture(path);
        CHECK(cap.meta.skipped() == 0);
        CHECK(cap.meta.packet_count == packets.size());
        REQUIRE(cap.packets.size() == packets.size());
        for (std::size_t i = 0; i < packets.size(); ++i) CHECK(cap.packets[i] == packets[i]);
        // Re-encoding the decoded records yields the same bytes.
        CHECK(pcap::encode_capture(cap.packets) == read_bytes(path));
    }
}

TEST_CASE("empty capture is a bare header")
{
    TempDir dir("pcap_empty");
    pcap::write_capture({}, dir / "e.pcap");
    const auto bytes = read_bytes(dir / "e.pcap");
    CHECK(bytes.size() == pcap::kGlobalHeaderLen);
    CHECK(le32(bytes, 0) == 0xa1b2c3d4u);
    CHECK(le32(bytes, 16) >= 65535u);
    CHECK(le32(bytes, 20) == 1u);
    const auto cap = pcap::read_capture(dir / "e.pcap");
    CHECK(cap.packets.empty());
}

TEST_CASE("byte-swapped and nanosecond files read the same")
{
    TempDir dir("pcap_variants");
    Rng rng(11);
    std::vector<PacketRecord> packets;
    for (int i = 0; i < 30; ++i) packets.push_back(testgen::random_packet(rng));
    const auto le = pcap::encode_capture(packets);

    auto swapped = le;
    swap32_at(swapped, 0);
    swap16_at(swapped, 4);
    swap16_at(swapped, 6);
    for (std::size_t at : {8, 12, 16, 20}) swap32_at(swapped, at);
    std::size_t off = pcap::kGlobalHeaderLen;
    while (off < swapped.size()) {
        const std::uint32_t incl = le32(le, off + 8);
        for (std::size_t k = 0; k < 4; ++k) swap32_at(swapped, off + 4 * k);
        off += pcap::kRecordHeaderLen + incl;
    }
    write_bytes(dir / "be.pcap", swapped);
    const auto be_cap = pcap::read_capture(dir / "be.pcap");
    CHECK(be_cap.packets == packets);

    auto nano = le;
    put_le32(nano, 0, 0xa1b23c4d);
    off = pcap::kGlobalHeaderLen;
    while (off < nano.size()) {
        put_le32(nano, off + 4, le32(nano, off + 4) * 1000 + 999);
        off += pcap::kRecordHeaderLen + le32(nano, off + 8);
    }
    write_bytes(dir / "ns.pcap", nano);
    const auto ns_cap = pcap::read_capture(dir / "ns.pcap");
    CHECK(ns_cap.meta.ts_resolution == pcap::TimestampResolution::nano);
    CHECK(ns_cap.packets == packets);
}

TEST_CASE("header and record errors")
{
    TempDir dir("pcap_errors");
    write_bytes(dir / "short.pcap", {0xd4, 0xc3, 0xb2});
    CHECK_THROWS_AS(pcap::read_capture(dir / "short.pcap"), FormatError);

    auto bytes = pcap::encode_capture(std::vector<PacketRecord>{tcp_packet()});
    auto bad_magic = bytes;
    bad_magic[0] = 0;
    write_bytes(dir / "magic.pcap", bad_magic);
    CHECK_THROWS_AS(pcap::read_capture(dir / "magic.pcap"), FormatError);

    auto raw_ip = bytes;
    put_le32(raw_ip, 20, 101);
    write_bytes(dir / "linktype.pcap", raw_ip);
    CHECK_THROWS_AS(pcap::read_capture(dir / "linktype.pcap"), UnsupportedFormatError);

    auto truncated = bytes;
    truncated.resize(truncated.size() - 5);
    write_bytes(dir / "trunc.pcap", truncated);
    try {
        pcap::read_capture(dir / "trunc.pcap");
        FAIL("expected FormatError");
    } catch (const FormatError& e) {
        CHECK(std::string(e.what()).find("byte offset 24") != std::string::npos);
    }

    CHECK_THROWS_AS(pcap::read_capture(dir / "missing.pcap"), IoError);
}

TEST_CASE("non-IPv4 frames are counted and skipped")
{
    TempDir dir("pcap_skip");
    auto bytes = pcap::encode_capture(std::vector<PacketRecord>{tcp_packet(), tcp_packet()});
    // Turn the first frame's ethertype into IPv6.
    const std::size_t eth = pcap::kGlobalHeaderLen + pcap::kRecordHeaderLen + 12;
    bytes[eth] = 0x86;
    bytes[eth + 1] = 0xdd;
    write_bytes(dir / "v6.pcap", bytes);
    const auto cap = pcap::read_capture(dir / "v6.pcap");
    CHECK(cap.packets.size() == 1);
    CHECK(cap.meta.skipped_non_ipv4 == 1);
    CHECK(cap.meta.packet_count == 2);
}

TEST_CASE("decode_frame is total over arbitrary bytes")
{
    Rng rng(derive_seed(99, 2));
    std::size_t ok = 0;
    for (int i = 0; i < 5000; ++i) {
        std::vector<std::uint8_t> frame;
        if (rng.bernoulli(0.5)) {
            frame = pcap::encode_frame(testgen::random_packet(rng));
            frame.resize(rng.index(frame.size() + 1));  // truncate anywhere
            if (!frame.empty() && rng.bernoulli(0.5)) frame[rng.index(frame.size())] ^= 0xff;
        } else {
            frame.resize(rng.index(120));
            for (auto& b : frame) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        }
        pcap::DecodeResult r;
        CHECK_NOTHROW(r = pcap::decode_frame(frame));
        if (r.status == pcap::DecodeStatus::ok) {
            REQUIRE(r.record.has_value());
            CHECK(r.record->payload_len <= r.record->ip_total_len);
            ++ok;
        } else {
            CHECK_FALSE(r.record.has_value());
        }
    }
    CHECK(ok > 0);
}

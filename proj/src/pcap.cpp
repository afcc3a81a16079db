#include "flowforge/pcap.hpp"

#include <array>
#include <limits>

#include "flowforge/error.hpp"

namespace flowforge::pcap {

namespace {

constexpr std::uint32_t kMagicMicro = 0xa1b2c3d4;
constexpr std::uint32_t kMagicNano = 0xa1b23c4d;
constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;
// Guards against absurd incl_len values in corrupt files.
constexpr std::uint32_t kMaxRecordLen = 16u << 20;

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }

std::uint32_t be32(const std::uint8_t* p)
{
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

std::uint32_t le32(const std::uint8_t* p)
{
    return (std::uint32_t{p[3]} << 24) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[1]} << 8) | p[0];
}

void put_be16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    put_be16(out, static_cast<std::uint16_t>(v >> 16));
    put_be16(out, static_cast<std::uint16_t>(v));
}

void put_le16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    put_le16(out, static_cast<std::uint16_t>(v));
    put_le16(out, static_cast<std::uint16_t>(v >> 16));
}

void set_be16(std::vector<std::uint8_t>& out, std::size_t at, std::uint16_t v)
{
    out[at] = static_cast<std::uint8_t>(v >> 8);
    out[at + 1] = static_cast<std::uint8_t>(v);
}

std::uint32_t checksum_add(std::uint32_t sum, std::span<const std::uint8_t> bytes)
{
    std::size_t i = 0;
    for (; i + 1 < bytes.size(); i += 2) sum += be16(&bytes[i]);
    if (i < bytes.size()) sum += std::uint32_t{bytes[i]} << 8;
    return sum;
}

std::uint16_t checksum_fold(std::uint32_t sum)
{
    while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
    return static_cast<std::uint16_t>(~sum);
}

DecodeResult malformed(std::string why) { return {DecodeStatus::malformed, std::nullopt, std::move(why)}; }

std::uint8_t parse_tcp_options(std::span<const std::uint8_t> opts)
{
    std::uint8_t seen = 0;
    std::size_t i = 0;
    while (i < opts.size()) {
        const std::uint8_t kind = opts[i];
        if (kind == 0) break;
        if (kind == 1) {
            ++i;
            continue;
        }
        if (i + 1 >= opts.size() || opts[i + 1] < 2 || i + opts[i + 1] > opts.size()) {
            seen |= tcp_option::other;
            break;
        }
        switch (kind) {
        case 2: seen |= tcp_option::mss; break;
        case 3: seen |= tcp_option::window_scale; break;
        case 4: seen |= tcp_option::sack_permitted; break;
        case 8: seen |= tcp_option::timestamp; break;
        default: seen |= tcp_option::other; break;
        }
        i += opts[i + 1];
    }
    return seen;
}

void append_tcp_options(std::vector<std::uint8_t>& out, std::uint8_t options)
{
    const std::size_t start = out.size();
    if (options & tcp_option::mss) out.insert(out.end(), {2, 4, 0x05, 0xb4});
    if (options & tcp_option::sack_permitted) out.insert(out.end(), {4, 2});
    if (options & tcp_option::timestamp) out.insert(out.end(), {8, 10, 0, 0, 0, 0, 0, 0, 0, 0});
    if (options & tcp_option::window_scale) out.insert(out.end(), {1, 3, 3, 7});
    // RFC 4727 experimental kind stands in for any unrecognized option.
    if (options & tcp_option::other) out.insert(out.end(), {253, 2});
    while ((out.size() - start) % 4 != 0) out.push_back(0);
}

}  // namespace

DecodeResult decode_frame(std::span<const std::uint8_t> frame, std::uint32_t link_type)
{
    if (link_type != kLinkTypeEthernet) {
        return malformed("unsupported link type " + std::to_string(link_type));
    }
    if (frame.size() < 14) return malformed("frame shorter than Ethernet header");

    PacketRecord rec;
    std::array<std::uint8_t, 6> mac{};
    std::copy_n(frame.begin(), 6, mac.begin());
    rec.dst_mac = MacAddress(mac);
    std::copy_n(frame.begin() + 6, 6, mac.begin());
    rec.src_mac = MacAddress(mac);

    std::size_t off = 12;
    std::uint16_t ether_type = be16(&frame[off]);
    off += 2;
    if (ether_type == kEtherTypeVlan) {
        if (frame.size() < off + 4) return malformed("frame shorter than 802.1Q tag");
        rec.vlan_id = static_cast<std::uint16_t>(be16(&frame[off]) & 0x0fff);
        ether_type = be16(&frame[off + 2]);
        off += 4;
    }
    if (ether_type != kEtherTypeIpv4) {
        return {DecodeStatus::not_ipv4, std::nullopt, "ethertype " + std::to_string(ether_type)};
    }

    if (frame.size() < off + 20) return malformed("frame shorter than IPv4 header");
    const std::uint8_t* ip = &frame[off];
    if ((ip[0] >> 4) != 4) return malformed("IP version is not 4");
    const std::size_t ihl = std::size_t{ip[0] & 0x0fu} * 4;
    if (ihl < 20) return malformed("IPv4 header length below 20");
    if (frame.size() < off + ihl) return malformed("frame shorter than declared IPv4 header length");
    rec.dscp = static_cast<std::uint8_t>(ip[1] >> 2);
    rec.ip_total_len = be16(ip + 2);
    if (rec.ip_total_len < ihl) return malformed("IPv4 total length below header length");
    const std::uint16_t frag = be16(ip + 6);
    rec.more_fragments = (frag & 0x2000) != 0;
    rec.frag_offset = frag & 0x1fff;
    rec.ttl = ip[8];
    rec.protocol = ip[9];
    rec.src_ip = Ipv4Address(be32(ip + 12));
    rec.dst_ip = Ipv4Address(be32(ip + 16));
    off += ihl;

    std::size_t l4_len = 0;
    if (rec.has_l4_header()) {
        if (rec.protocol == kProtoTcp) {
            if (frame.size() < off + 20) return malformed("frame shorter than TCP header");
            const std::uint8_t* tcp = &frame[off];
            l4_len = std::size_t{static_cast<std::uint8_t>(tcp[12] >> 4)} * 4;
            if (l4_len < 20) return malformed("TCP data offset below 20");
            if (frame.size() < off + l4_len) return malformed("frame shorter than declared TCP header length");
            rec.src_port = be16(tcp);
            rec.dst_port = be16(tcp + 2);
            rec.tcp_flags = tcp[13];
            rec.tcp_window = be16(tcp + 14);
            rec.tcp_options = parse_tcp_options(frame.subspan(off + 20, l4_len - 20));
        } else {
            if (frame.size() < off + 8) return malformed("frame shorter than UDP header");
            l4_len = 8;
            rec.src_port = be16(&frame[off]);
            rec.dst_port = be16(&frame[off + 2]);
        }
        if (rec.ip_total_len < ihl + l4_len) return malformed("IPv4 total length below L3+L4 header length");
    }
    rec.payload_len = static_cast<std::uint16_t>(rec.ip_total_len - ihl - l4_len);
    return {DecodeStatus::ok, rec, {}};
}

std::vector<std::uint8_t> encode_frame(const PacketRecord& pkt)
{
    if (auto why = check_invariants(pkt); !why.empty()) {
        throw DataError("packet not representable: " + why);
    }
    const int l4_len = l4_header_len(pkt);
    if (pkt.ip_total_len != 20 + l4_len + pkt.payload_len) {
        throw DataError("packet not representable: ip_total_len " + std::to_string(pkt.ip_total_len) +
                        " != 20 + " + std::to_string(l4_len) + " + payload " + std::to_string(pkt.payload_len));
    }

    std::vector<std::uint8_t> out;
    out.reserve(18 + pkt.ip_total_len);
    out.insert(out.end(), pkt.dst_mac.bytes().begin(), pkt.dst_mac.bytes().end());
    out.insert(out.end(), pkt.src_mac.bytes().begin(), pkt.src_mac.bytes().end());
    if (pkt.vlan_id) {
        put_be16(out, kEtherTypeVlan);
        put_be16(out, *pkt.vlan_id);
    }
    put_be16(out, kEtherTypeIpv4);

    const std::size_t ip_at = out.size();
    out.push_back(0x45);
    out.push_back(static_cast<std::uint8_t>(pkt.dscp << 2));
    put_be16(out, pkt.ip_total_len);
    put_be16(out, 0);  // identification
    put_be16(out, static_cast<std::uint16_t>((pkt.more_fragments ? 0x2000 : 0) | pkt.frag_offset));
    out.push_back(pkt.ttl);
    out.push_back(pkt.protocol);
    put_be16(out, 0);  // checksum, filled below
    put_be32(out, pkt.src_ip.value());
    put_be32(out, pkt.dst_ip.value());
    set_be16(out, ip_at + 10, checksum_fold(checksum_add(0, std::span(out).subspan(ip_at, 20))));

    const std::size_t l4_at = out.size();
    if (pkt.has_l4_header() && pkt.protocol == kProtoTcp) {
        put_be16(out, pkt.src_port);
        put_be16(out, pkt.dst_port);
        put_be32(out, 0);  // seq
        put_be32(out, 0);  // ack
        out.push_back(static_cast<std::uint8_t>((l4_len / 4) << 4));
        out.push_back(*pkt.tcp_flags);
        put_be16(out, *pkt.tcp_window);
        put_be16(out, 0);  // checksum
        put_be16(out, 0);  // urgent pointer
        append_tcp_options(out, pkt.tcp_options);
    } else if (pkt.has_l4_header()) {
        put_be16(out, pkt.src_port);
        put_be16(out, pkt.dst_port);
        put_be16(out, static_cast<std::uint16_t>(8 + pkt.payload_len));
        put_be16(out, 0);
    }
    out.resize(out.size() + pkt.payload_len, 0);

    const bool whole_datagram = pkt.frag_offset == 0 && !pkt.more_fragments;
    if (pkt.has_l4_header() && whole_datagram) {
        const auto segment_len = static_cast<std::uint32_t>(out.size() - l4_at);
        std::uint32_t sum = 0;
        sum += pkt.src_ip.value() >> 16;
        sum += pkt.src_ip.value() & 0xffff;
        sum += pkt.dst_ip.value() >> 16;
        sum += pkt.dst_ip.value() & 0xffff;
        sum += pkt.protocol;
        sum += segment_len;
        std::uint16_t csum = checksum_fold(checksum_add(sum, std::span(out).subspan(l4_at)));
        if (pkt.protocol == kProtoUdp && csum == 0) csum = 0xffff;
        set_be16(out, l4_at + (pkt.protocol == kProtoTcp ? 16 : 6), csum);
    }
    return out;
}

CaptureReader::CaptureReader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary)
{
    if (!in_) throw IoError("cannot open capture '" + path.string() + "'");
    std::array<std::uint8_t, kGlobalHeaderLen> hdr{};
    in_.read(reinterpret_cast<char*>(hdr.data()), hdr.size());
    if (static_cast<std::size_t>(in_.gcount()) != hdr.size()) {
        throw FormatError("'" + path.string() + "': file shorter than the 24-byte pcap global header");
    }
    const std::uint32_t magic = le32(hdr.data());
    if (magic == kMagicMicro || magic == kMagicNano) {
        swapped_ = false;
    } else if (be32(hdr.data()) == kMagicMicro || be32(hdr.data()) == kMagicNano) {
        swapped_ = true;
    } else {
        throw FormatError("'" + path.string() + "': bad pcap magic number");
    }
    meta_.ts_resolution = read_u32(hdr.data()) == kMagicNano ? TimestampResolution::nano : TimestampResolution::micro;
    const std::uint32_t version = read_u32(hdr.data() + 4);
    const std::uint16_t major = swapped_ ? static_cast<std::uint16_t>(version >> 16) : static_cast<std::uint16_t>(version);
    if (major != 2) {
        throw FormatError("'" + path.string() + "': unsupported pcap major version " + std::to_string(major));
    }
    meta_.link_type = read_u32(hdr.data() + 20) & 0x0fffffff;
    if (meta_.link_type != kLinkTypeEthernet) {
        throw UnsupportedFormatError("'" + path.string() + "': unsupported link type " +
                                     std::to_string(meta_.link_type) + " (only Ethernet is handled)");
    }
    offset_ = kGlobalHeaderLen;
}

std::uint32_t CaptureReader::read_u32(const std::uint8_t* p) const { return swapped_ ? be32(p) : le32(p); }

std::optional<PacketRecord> CaptureReader::next()
{
    for (;;) {
        std::array<std::uint8_t, kRecordHeaderLen> rh{};
        in_.read(reinterpret_cast<char*>(rh.data()), rh.size());
        const auto got = static_cast<std::size_t>(in_.gcount());
        if (got == 0) return std::nullopt;
        const std::uint64_t record_at = offset_;
        if (got != rh.size()) {
            throw FormatError("'" + path_.string() + "': truncated record header at byte offset " +
                              std::to_string(record_at));
        }
        const std::uint32_t ts_sec = read_u32(rh.data());
        const std::uint32_t ts_frac = read_u32(rh.data() + 4);
        const std::uint32_t incl_len = read_u32(rh.data() + 8);
        if (incl_len > kMaxRecordLen) {
            throw FormatError("'" + path_.string() + "': implausible record length " + std::to_string(incl_len) +
                              " at byte offset " + std::to_string(record_at));
        }
        frame_.resize(incl_len);
        in_.read(reinterpret_cast<char*>(frame_.data()), incl_len);
        if (static_cast<std::size_t>(in_.gcount()) != incl_len) {
            throw FormatError("'" + path_.string() + "': truncated record at byte offset " +
                              std::to_string(record_at) + " (declares " + std::to_string(incl_len) +
                              " bytes, " + std::to_string(in_.gcount()) + " present)");
        }
        offset_ += kRecordHeaderLen + incl_len;
        ++meta_.packet_count;

        auto decoded = decode_frame(frame_, meta_.link_type);
        if (decoded.status == DecodeStatus::not_ipv4) {
            ++meta_.skipped_non_ipv4;
            continue;
        }
        if (decoded.status == DecodeStatus::malformed) {
            ++meta_.skipped_malformed;
            continue;
        }
        const std::int64_t usec =
            meta_.ts_resolution == TimestampResolution::nano ? ts_frac / 1000 : ts_frac;
        decoded.record->ts_us = std::int64_t{ts_sec} * 1'000'000 + usec;
        return decoded.record;
    }
}

Capture read_capture(const std::filesystem::path& path)
{
    CaptureReader reader(path);
    Capture capture;
    while (auto rec = reader.next()) capture.packets.push_back(*rec);
    capture.meta = reader.meta();
    return capture;
}

std::vector<std::uint8_t> encode_capture(std::span<const PacketRecord> packets)
{
    std::vector<std::uint8_t> out;
    put_le32(out, kMagicMicro);
    put_le16(out, 2);
    put_le16(out, 4);
    put_le32(out, 0);  // thiszone
    put_le32(out, 0);  // sigfigs
    put_le32(out, kSnapLen);
    put_le32(out, kLinkTypeEthernet);
    for (const auto& pkt : packets) {
        if (pkt.ts_us < 0 || pkt.ts_us / 1'000'000 > std::numeric_limits<std::uint32_t>::max()) {
            throw DataError("packet timestamp not representable in pcap: " + std::to_string(pkt.ts_us));
        }
        const auto frame = encode_frame(pkt);
        put_le32(out, static_cast<std::uint32_t>(pkt.ts_us / 1'000'000));
        put_le32(out, static_cast<std::uint32_t>(pkt.ts_us % 1'000'000));
        put_le32(out, static_cast<std::uint32_t>(frame.size()));
        put_le32(out, static_cast<std::uint32_t>(frame.size()));
        out.insert(out.end(), frame.begin(), frame.end());
    }
    return out;
}

void write_capture(std::span<const PacketRecord> packets, const std::filesystem::path& path)
{
    const auto bytes = encode_capture(packets);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write capture '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for capture '" + path.string() + "'");
}

}  // namespace flowforge::pcap

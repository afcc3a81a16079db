#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowforge/packet.hpp"

namespace flowforge::pcap {

inline constexpr std::uint32_t kLinkTypeEthernet = 1;
inline constexpr std::size_t kGlobalHeaderLen = 24;
inline constexpr std::size_t kRecordHeaderLen = 16;
inline constexpr std::uint32_t kSnapLen = 262144;

enum class TimestampResolution { micro, nano };

struct CaptureMeta {
    std::uint32_t link_type = kLinkTypeEthernet;
    // Resolution of the source file; records are always held in microseconds.
    TimestampResolution ts_resolution = TimestampResolution::micro;
    // Records present in the file, including skipped ones.
    std::size_t packet_count = 0;
    std::size_t skipped_non_ipv4 = 0;
    std::size_t skipped_malformed = 0;

    std::size_t skipped() const { return skipped_non_ipv4 + skipped_malformed; }
};

struct Capture {
    std::vector<PacketRecord> packets;
    CaptureMeta meta;
};

enum class DecodeStatus { ok, not_ipv4, malformed };

struct DecodeResult {
    DecodeStatus status = DecodeStatus::malformed;
    std::optional<PacketRecord> record;
    std::string error;
};

/// Decodes Ethernet, an optional 802.1Q tag, IPv4 and TCP/UDP headers.
/// Total over arbitrary input: bad frames yield a status, never an exception.
DecodeResult decode_frame(std::span<const std::uint8_t> frame, std::uint32_t link_type = kLinkTypeEthernet);

/// Builds the wire frame for a record. Payload bytes are zero-filled and the
/// IPv4, TCP and UDP checksums are filled in. Throws DataError when the record
/// cannot be represented (see check_invariants and payload_len consistency).
std::vector<std::uint8_t> encode_frame(const PacketRecord& pkt);

/// Streaming reader over a classic pcap file. Accepts both byte orders and
/// the nanosecond variant (timestamps truncated to microseconds).
class CaptureReader {
public:
    explicit CaptureReader(const std::filesystem::path& path);

    /// Next IPv4 record in file order, or nullopt at end of file. Non-IPv4
    /// and undecodable frames are counted in meta() and skipped.
    std::optional<PacketRecord> next();

    const CaptureMeta& meta() const { return meta_; }

private:
    std::uint32_t read_u32(const std::uint8_t* p) const;

    std::filesystem::path path_;
    std::ifstream in_;
    std::uint64_t offset_ = 0;
    bool swapped_ = false;
    CaptureMeta meta_;
    std::vector<std::uint8_t> frame_;
};

/// Throws FormatError on a bad header or truncated record (the message names
/// the byte offset), UnsupportedFormatError on a non-Ethernet link type.
Capture read_capture(const std::filesystem::path& path);

/// Serializes records as a little-endian microsecond pcap file image.
std::vector<std::uint8_t> encode_capture(std::span<const PacketRecord> packets);

/// Throws IoError when the path cannot be written.
void write_capture(std::span<const PacketRecord> packets, const std::filesystem::path& path);

}  // namespace flowforge::pcap

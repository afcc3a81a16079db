#include "flowforge/net.hpp"

#include <charconv>
#include <cstdio>

#include "flowforge/error.hpp"

namespace flowforge {

namespace {

int parse_decimal(std::string_view text, int max_value, std::string_view what)
{
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end || value < 0 || value > max_value) {
        throw FormatError("invalid " + std::string(what) + ": '" + std::string(text) + "'");
    }
    return value;
}

int hex_digit(char c)
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

}  // namespace

Ipv4Address Ipv4Address::parse(std::string_view text)
{
    std::uint32_t value = 0;
    std::string_view rest = text;
    for (int i = 0; i < 4; ++i) {
        auto dot = rest.find('.');
        if ((i < 3) == (dot == std::string_view::npos)) {
            throw FormatError("invalid IPv4 address: '" + std::string(text) + "'");
        }
        auto part = rest.substr(0, dot);
        value = (value << 8) | static_cast<std::uint32_t>(parse_decimal(part, 255, "IPv4 octet"));
        rest = i < 3 ? rest.substr(dot + 1) : std::string_view{};
    }
    return Ipv4Address(value);
}

std::string Ipv4Address::to_string() const
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%u.%u.%u.%u", (value_ >> 24) & 0xffu, (value_ >> 16) & 0xffu,
                  (value_ >> 8) & 0xffu, value_ & 0xffu);
    return buf;
}

MacAddress MacAddress::parse(std::string_view text)
{
    if (text.size() != 17) {
        throw FormatError("invalid MAC address: '" + std::string(text) + "'");
    }
    std::array<std::uint8_t, 6> bytes{};
    for (std::size_t i = 0; i < 6; ++i) {
        int hi = hex_digit(text[i * 3]);
        int lo = hex_digit(text[i * 3 + 1]);
        if (hi < 0 || lo < 0 || (i < 5 && text[i * 3 + 2] != ':')) {
            throw FormatError("invalid MAC address: '" + std::string(text) + "'");
        }
        bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return MacAddress(bytes);
}

std::string MacAddress::to_string() const
{
    char buf[18];
    std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", bytes_[0], bytes_[1], bytes_[2],
                  bytes_[3], bytes_[4], bytes_[5]);
    return buf;
}

Cidr::Cidr(Ipv4Address network, int prefix_len) : prefix_len_(prefix_len)
{
    if (prefix_len < 0 || prefix_len > 32) {
        throw FormatError("invalid prefix length " + std::to_string(prefix_len));
    }
    mask_ = prefix_len == 0 ? 0u : ~std::uint32_t{0} << (32 - prefix_len);
    network_ = Ipv4Address(network.value() & mask_);
}

Cidr Cidr::parse(std::string_view text)
{
    auto slash = text.find('/');
    if (slash == std::string_view::npos) {
        throw FormatError("invalid CIDR (missing '/'): '" + std::string(text) + "'");
    }
    return Cidr(Ipv4Address::parse(text.substr(0, slash)),
                parse_decimal(text.substr(slash + 1), 32, "prefix length"));
}

std::string Cidr::to_string() const
{
    return network_.to_string() + "/" + std::to_string(prefix_len_);
}

}  // namespace flowforge

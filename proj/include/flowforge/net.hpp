#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flowforge {

/// IPv4 address held in host byte order.
class Ipv4Address {
public:
    constexpr Ipv4Address() = default;
    constexpr explicit Ipv4Address(std::uint32_t value) : value_(value) {}
    constexpr Ipv4Address(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d)
        : value_((std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) |
                 std::uint32_t{d}) {}

    /// Parses dotted-quad notation; throws FormatError.
    static Ipv4Address parse(std::string_view text);

    constexpr std::uint32_t value() const { return value_; }
    std::string to_string() const;

    constexpr auto operator<=>(const Ipv4Address&) const = default;

private:
    std::uint32_t value_ = 0;
};

class MacAddress {
public:
    constexpr MacAddress() = default;
    constexpr explicit MacAddress(std::array<std::uint8_t, 6> bytes) : bytes_(bytes) {}

    /// Parses "aa:bb:cc:dd:ee:ff"; throws FormatError.
    static MacAddress parse(std::string_view text);

    constexpr const std::array<std::uint8_t, 6>& bytes() const { return bytes_; }
    std::string to_string() const;

    constexpr auto operator<=>(const MacAddress&) const = default;

private:
    std::array<std::uint8_t, 6> bytes_{};
};

/// IPv4 prefix such as 192.168.1.0/24.
class Cidr {
public:
    Cidr() = default;
    Cidr(Ipv4Address network, int prefix_len);

    static Cidr parse(std::string_view text);

    bool contains(Ipv4Address addr) const { return (addr.value() & mask_) == network_.value(); }
    Ipv4Address network() const { return network_; }
    int prefix_len() const { return prefix_len_; }
    std::string to_string() const;

    bool operator==(const Cidr&) const = default;

private:
    Ipv4Address network_{};
    int prefix_len_ = 0;
    std::uint32_t mask_ = 0;
};

}  // namespace flowforge

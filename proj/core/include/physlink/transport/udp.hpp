#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace physlink::transport {

// Thin nonblocking UDP socket. Used by the standalone daemons; everything
// test-facing runs on SimulatedNetwork instead.
class UdpSocket {
public:
    UdpSocket();
    ~UdpSocket();
    UdpSocket(const UdpSocket&) = delete;
    UdpSocket& operator=(const UdpSocket&) = delete;
    UdpSocket(UdpSocket&& o) noexcept;
    UdpSocket& operator=(UdpSocket&& o) noexcept;

    void bind(std::uint16_t port);
    std::uint16_t local_port() const;

    struct Address {
        std::uint32_t ip = 0;       // host byte order
        std::uint16_t port = 0;
        bool operator<(const Address& o) const {
            return ip != o.ip ? ip < o.ip : port < o.port;
        }
        bool operator==(const Address&) const = default;
        std::string to_string() const;
    };

    static Address resolve(const std::string& host, std::uint16_t port);

    void send_to(const Address& to, const std::vector<std::uint8_t>& payload);

    struct Received {
        Address from;
        std::vector<std::uint8_t> payload;
    };
    std::optional<Received> receive();

private:
    int fd_ = -1;
};

} // namespace physlink::transport

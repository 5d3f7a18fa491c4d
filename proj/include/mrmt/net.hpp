#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "mrmt/error.hpp"

namespace mrmt {

// Socket-level failure (connect/read/write). Distinct from protocol errors so
// callers can treat it as a worker-connectivity event.
class NetError : public Error {
public:
    using Error::Error;
};

std::pair<std::string, std::uint16_t> parse_hostport(const std::string& address);

// Blocking TCP connection with RAII ownership of the descriptor.
class TcpStream {
public:
    TcpStream() = default;
    explicit TcpStream(int fd) : fd_(fd) {}
    ~TcpStream();

    TcpStream(TcpStream&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    TcpStream& operator=(TcpStream&& other) noexcept;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    static TcpStream connect(const std::string& host, std::uint16_t port,
                             double timeout_seconds = 5.0);

    bool valid() const { return fd_ >= 0; }

    // Reads until `len` bytes arrived or the peer closed; returns bytes read.
    std::size_t read_upto(void* buf, std::size_t len);

    // Writes the whole buffer or throws NetError.
    void write_all(std::string_view data);

    void shutdown() noexcept;  // both directions; wakes a blocked reader
    void close() noexcept;

private:
    int fd_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    ~TcpListener();

    TcpListener(TcpListener&& other) noexcept
        : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}
    TcpListener& operator=(TcpListener&& other) noexcept;
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    // port 0 binds an ephemeral port; the chosen one is available via port().
    static TcpListener bind(const std::string& host, std::uint16_t port);

    std::uint16_t port() const { return port_; }

    // Blocks; returns nullopt once the listener was shut down.
    std::optional<TcpStream> accept();

    void shutdown() noexcept;  // wakes a blocked accept()

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

}  // namespace mrmt

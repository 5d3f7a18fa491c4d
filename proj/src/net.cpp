#include "mrmt/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace mrmt {

namespace {

void ignore_sigpipe_once() {
    static const bool done = [] {
        ::signal(SIGPIPE, SIG_IGN);
        return true;
    }();
    (void)done;
}

[[noreturn]] void throw_errno(const std::string& what) {
    throw NetError(what + ": " + std::strerror(errno));
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_hostport(const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos || colon + 1 == address.size())
        throw std::invalid_argument("address must be host:port, got '" + address + "'");
    const std::string host = address.substr(0, colon);
    const std::string port_str = address.substr(colon + 1);
    char* end = nullptr;
    long port = std::strtol(port_str.c_str(), &end, 10);
    if (*end != '\0' || port < 0 || port > 65535)
        throw std::invalid_argument("bad port in address '" + address + "'");
    return {host.empty() ? "127.0.0.1" : host, static_cast<std::uint16_t>(port)};
}

TcpStream::~TcpStream() { close(); }

TcpStream& TcpStream::operator=(TcpStream&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port,
                             double timeout_seconds) {
    ignore_sigpipe_once();

    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* infos = nullptr;
    const std::string port_str = std::to_string(port);
    if (int rc = ::getaddrinfo(host.c_str(), port_str.c_str(), &hints, &infos); rc != 0)
        throw NetError("cannot resolve " + host + ": " + gai_strerror(rc));

    int fd = -1;
    std::string last_error = "no addresses";
    for (addrinfo* ai = infos; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
        if (fd < 0) {
            last_error = std::strerror(errno);
            continue;
        }
        // Non-blocking connect so the timeout can be honored.
        int flags = ::fcntl(fd, F_GETFL, 0);
        ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
        int rc = ::connect(fd, ai->ai_addr, ai->ai_addrlen);
        if (rc != 0 && errno == EINPROGRESS) {
            pollfd pfd{fd, POLLOUT, 0};
            rc = ::poll(&pfd, 1, static_cast<int>(timeout_seconds * 1000));
            if (rc == 1) {
                int err = 0;
                socklen_t len = sizeof(err);
                ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len);
                rc = err == 0 ? 0 : -1;
                errno = err;
            } else if (rc == 0) {
                rc = -1;
                errno = ETIMEDOUT;
            } else {
                rc = -1;
            }
        }
        if (rc == 0) {
            ::fcntl(fd, F_SETFL, flags);
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            break;
        }
        last_error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    ::freeaddrinfo(infos);
    if (fd < 0)
        throw NetError("cannot connect to " + host + ":" + port_str + ": " + last_error);
    return TcpStream(fd);
}

std::size_t TcpStream::read_upto(void* buf, std::size_t len) {
    if (fd_ < 0) throw NetError("read on closed stream");
    std::size_t got = 0;
    auto* p = static_cast<char*>(buf);
    while (got < len) {
        ssize_t n = ::read(fd_, p + got, len - got);
        if (n == 0) break;
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("read failed");
        }
        got += static_cast<std::size_t>(n);
    }
    return got;
}

void TcpStream::write_all(std::string_view data) {
    if (fd_ < 0) throw NetError("write on closed stream");
    std::size_t sent = 0;
    while (sent < data.size()) {
        ssize_t n = ::write(fd_, data.data() + sent, data.size() - sent);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("write failed");
        }
        sent += static_cast<std::size_t>(n);
    }
}

void TcpStream::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void TcpStream::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpListener::~TcpListener() {
    if (fd_ >= 0) ::close(fd_);
}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
    if (this != &other) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = std::exchange(other.fd_, -1);
        port_ = other.port_;
    }
    return *this;
}

TcpListener TcpListener::bind(const std::string& host, std::uint16_t port) {
    ignore_sigpipe_once();

    TcpListener listener;
    listener.fd_ = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listener.fd_ < 0) throw_errno("socket() failed");

    int one = 1;
    ::setsockopt(listener.fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
        throw NetError("listener host must be an IPv4 address, got '" + host + "'");

    if (::bind(listener.fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0)
        throw_errno("bind to " + host + ":" + std::to_string(port) + " failed");
    if (::listen(listener.fd_, 64) != 0) throw_errno("listen failed");

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    ::getsockname(listener.fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    listener.port_ = ntohs(bound.sin_port);
    return listener;
}

std::optional<TcpStream> TcpListener::accept() {
    while (true) {
        int fd = ::accept4(fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpStream(fd);
        }
        if (errno == EINTR) continue;
        return std::nullopt;  // listener shut down (or fatal accept error)
    }
}

void TcpListener::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

}  // namespace mrmt

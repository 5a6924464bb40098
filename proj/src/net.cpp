/*
Copyright 2026 The hfsts Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#include "hfsts/net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace hfsts::net {

namespace {

std::string last_error(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

sockaddr_in resolve(const Endpoint& ep) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    const auto port = std::to_string(ep.port);
    if (int rc = getaddrinfo(ep.host.c_str(), port.c_str(), &hints, &res); rc != 0 || res == nullptr)
        throw NetError("cannot resolve " + ep.str() + ": " + gai_strerror(rc));
    sockaddr_in addr{};
    std::memcpy(&addr, res->ai_addr, sizeof(addr));
    freeaddrinfo(res);
    return addr;
}

int poll_ms(std::optional<std::chrono::steady_clock::time_point> deadline) {
    if (!deadline) return -1;
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - std::chrono::steady_clock::now());
    return static_cast<int>(std::max<std::int64_t>(0, left.count()));
}

} // namespace

Endpoint Endpoint::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon + 1 >= text.size())
        throw NetError("expected HOST:PORT, got '" + std::string(text) + "'");
    Endpoint ep;
    ep.host = std::string(text.substr(0, colon));
    if (ep.host.empty()) ep.host = "0.0.0.0";
    try {
        std::size_t used = 0;
        const auto port_text = std::string(text.substr(colon + 1));
        ep.port = std::stoi(port_text, &used);
        if (used != port_text.size() || ep.port < 0 || ep.port > 65535) throw std::invalid_argument("port");
    } catch (const std::exception&) {
        throw NetError("invalid port in '" + std::string(text) + "'");
    }
    return ep;
}

Socket& Socket::operator=(Socket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = std::exchange(other.fd_, -1);
    }
    return *this;
}

void Socket::close() noexcept {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void Socket::shutdown() noexcept {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket connect(const Endpoint& ep, std::chrono::milliseconds timeout) {
    const auto addr = resolve(ep);
    Socket sock(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!sock.valid()) throw NetError(last_error("socket"));

    const int flags = fcntl(sock.fd(), F_GETFL, 0);
    fcntl(sock.fd(), F_SETFL, flags | O_NONBLOCK);
    if (::connect(sock.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
        if (errno != EINPROGRESS) throw NetError(last_error(("connect " + ep.str()).c_str()));
        pollfd pfd{sock.fd(), POLLOUT, 0};
        const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
        if (rc == 0) throw NetError("connect " + ep.str() + ": timed out");
        int err = 0;
        socklen_t len = sizeof(err);
        getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
        if (rc < 0 || err != 0) {
            errno = err;
            throw NetError(last_error(("connect " + ep.str()).c_str()));
        }
    }
    fcntl(sock.fd(), F_SETFL, flags);
    int one = 1;
    setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return sock;
}

Listener Listener::bind(const Endpoint& ep) {
    const auto addr = resolve(ep);
    Listener l;
    l.sock_ = Socket(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!l.sock_.valid()) throw NetError(last_error("socket"));
    int one = 1;
    setsockopt(l.sock_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(l.sock_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0)
        throw NetError(last_error(("bind " + ep.str()).c_str()));
    if (::listen(l.sock_.fd(), 64) != 0) throw NetError(last_error("listen"));

    sockaddr_in bound{};
    socklen_t len = sizeof(bound);
    getsockname(l.sock_.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
    l.local_ = Endpoint{ep.host, ntohs(bound.sin_port)};
    return l;
}

std::optional<Socket> Listener::accept(std::chrono::milliseconds timeout) {
    if (!sock_.valid()) throw NetError("listener closed");
    pollfd pfd{sock_.fd(), POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(timeout.count()));
    if (rc <= 0) return std::nullopt;
    if (pfd.revents & (POLLERR | POLLHUP | POLLNVAL)) throw NetError("listener shut down");
    const int fd = ::accept4(sock_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) return std::nullopt;
    int one = 1;
    setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return Socket(fd);
}

LineChannel::Status LineChannel::read_line(std::string& out,
                                           std::optional<std::chrono::steady_clock::time_point> deadline) {
    for (;;) {
        if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
            out.assign(buffer_, 0, nl);
            buffer_.erase(0, nl + 1);
            return Status::line;
        }
        if (buffer_.size() > kMaxLine) return Status::closed;
        if (!sock_.valid()) return Status::closed;

        pollfd pfd{sock_.fd(), POLLIN, 0};
        const int rc = ::poll(&pfd, 1, poll_ms(deadline));
        if (rc < 0) {
            if (errno == EINTR) continue;
            return Status::closed;
        }
        if (rc == 0) return Status::timeout;

        char chunk[65536];
        const ssize_t got = ::recv(sock_.fd(), chunk, sizeof(chunk), 0);
        if (got < 0 && errno == EINTR) continue;
        if (got <= 0) return Status::closed;
        buffer_.append(chunk, static_cast<std::size_t>(got));
    }
}

void LineChannel::write(std::string_view text) {
    std::lock_guard lock(write_mu_);
    while (!text.empty()) {
        const ssize_t sent = ::send(sock_.fd(), text.data(), text.size(), MSG_NOSIGNAL);
        if (sent < 0) {
            if (errno == EINTR) continue;
            throw NetError(last_error("send"));
        }
        text.remove_prefix(static_cast<std::size_t>(sent));
    }
}

} // namespace hfsts::net

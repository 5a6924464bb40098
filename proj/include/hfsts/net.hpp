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

#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace hfsts::net {

class NetError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Endpoint {
    std::string host = "127.0.0.1";
    int port = 0;

    /// "host:port"; throws NetError when malformed.
    static Endpoint parse(std::string_view text);
    std::string str() const { return host + ":" + std::to_string(port); }
    bool operator==(const Endpoint&) const = default;
};

/// Owning TCP socket descriptor.
class Socket {
  public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { close(); }

    int fd() const noexcept { return fd_; }
    bool valid() const noexcept { return fd_ >= 0; }
    void close() noexcept;
    /// Wakes blocked readers and writers on this socket without releasing the descriptor.
    void shutdown() noexcept;

  private:
    int fd_ = -1;
};

Socket connect(const Endpoint& ep, std::chrono::milliseconds timeout);

class Listener {
  public:
    /// Binds and listens; port 0 picks an ephemeral port. Throws NetError on failure.
    static Listener bind(const Endpoint& ep);

    Endpoint local() const { return local_; }
    /// Waits up to timeout for a connection.
    std::optional<Socket> accept(std::chrono::milliseconds timeout);
    void shutdown() noexcept { sock_.shutdown(); }
    void close() noexcept { sock_.close(); }

  private:
    Socket sock_;
    Endpoint local_;
};

/// Newline-delimited framing over a socket. Writes are serialized; one reader at a time.
class LineChannel {
  public:
    enum class Status { line, timeout, closed };

    static constexpr std::size_t kMaxLine = 64u << 20;

    explicit LineChannel(Socket sock) : sock_(std::move(sock)) {}

    /// Reads the next line (without its newline). A missing deadline waits indefinitely.
    Status read_line(std::string& out, std::optional<std::chrono::steady_clock::time_point> deadline);

    /// Writes text, which must already end with a newline. Throws NetError on failure.
    void write(std::string_view text);

    void shutdown() noexcept { sock_.shutdown(); }

  private:
    Socket sock_;
    std::string buffer_;
    std::mutex write_mu_;
};

} // namespace hfsts::net

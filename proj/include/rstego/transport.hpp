#pragma once

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "rstego/bmp4.hpp"
#include "rstego/payload.hpp"
#include "rstego/reference_image.hpp"
#include "rstego/stego.hpp"

namespace rstego::transport {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TooLong : Error {
    using Error::Error;
};
struct BadKind : Error {
    using Error::Error;
};
struct Truncated : Error {
    using Error::Error;
};
struct ChecksumMismatch : Error {
    using Error::Error;
};
// Channel read deadline expired before the frame finished arriving.
struct Timeout : Error {
    using Error::Error;
};
// Fewer than two frames were joined before the session deadline.
struct Incomplete : Error {
    using Error::Error;
};
struct SocketError : Error {
    using Error::Error;
};

// ---------------------------------------------------------------------------
// CRC-32 (reflected polynomial 0xEDB88320, the zlib/PNG variant)

namespace detail {

constexpr std::array<std::uint32_t, 256> make_crc_table() {
    std::array<std::uint32_t, 256> table{};
    for (std::uint32_t i = 0; i < 256; ++i) {
        std::uint32_t c = i;
        for (int k = 0; k < 8; ++k)
            c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
        table[i] = c;
    }
    return table;
}

inline constexpr auto kCrcTable = make_crc_table();

}  // namespace detail

inline std::uint32_t crc32(std::span<const std::uint8_t> data) {
    std::uint32_t c = 0xFFFFFFFFu;
    for (std::uint8_t b : data)
        c = detail::kCrcTable[(c ^ b) & 0xFF] ^ (c >> 8);
    return c ^ 0xFFFFFFFFu;
}

// ---------------------------------------------------------------------------
// Frame codec
//
// kind:u8 (0x01 image, 0x02 payload), body_length:u32le, body, crc32(body):u32le

enum class FrameKind : std::uint8_t { Image = 0x01, Payload = 0x02 };

struct Frame {
    FrameKind kind = FrameKind::Image;
    std::vector<std::uint8_t> body;
};

inline std::vector<std::uint8_t> encode_frame(
    FrameKind kind, std::span<const std::uint8_t> body) {
    if (body.size() > 0xFFFFFFFFull)
        throw TooLong("frame body of " + std::to_string(body.size()) +
                      " bytes exceeds the 32-bit length field");

    std::vector<std::uint8_t> out;
    out.reserve(9 + body.size());
    out.push_back(std::uint8_t(kind));
    const std::uint32_t len = std::uint32_t(body.size());
    const std::uint32_t sum = crc32(body);
    for (int shift = 0; shift < 32; shift += 8)
        out.push_back(std::uint8_t((len >> shift) & 0xFF));
    out.insert(out.end(), body.begin(), body.end());
    for (int shift = 0; shift < 32; shift += 8)
        out.push_back(std::uint8_t((sum >> shift) & 0xFF));
    return out;
}

inline Frame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 5)
        throw Truncated("frame header cut short");
    const std::uint8_t kind = bytes[0];
    if (kind != std::uint8_t(FrameKind::Image) &&
        kind != std::uint8_t(FrameKind::Payload))
        throw BadKind("unknown frame kind " + std::to_string(kind));

    const std::uint64_t len = std::uint32_t(bytes[1]) |
                              (std::uint32_t(bytes[2]) << 8) |
                              (std::uint32_t(bytes[3]) << 16) |
                              (std::uint32_t(bytes[4]) << 24);
    if (bytes.size() < 5 + len + 4)
        throw Truncated("frame body cut short");
    if (bytes.size() > 5 + len + 4)
        throw Truncated("frame longer than its declared length");

    Frame f;
    f.kind = FrameKind(kind);
    f.body.assign(bytes.begin() + 5, bytes.begin() + 5 + std::size_t(len));

    const std::uint8_t* c = bytes.data() + 5 + len;
    const std::uint32_t stored = std::uint32_t(c[0]) |
                                 (std::uint32_t(c[1]) << 8) |
                                 (std::uint32_t(c[2]) << 16) |
                                 (std::uint32_t(c[3]) << 24);
    if (stored != crc32(f.body))
        throw ChecksumMismatch("frame body checksum does not verify");
    return f;
}

// ---------------------------------------------------------------------------
// Channels

using Deadline = std::optional<std::chrono::steady_clock::time_point>;

// A one-directional byte stream. read_some blocks until at least one byte
// is available, the peer has closed (returns 0), or the deadline passes
// (throws Timeout).
class ByteChannel {
public:
    virtual ~ByteChannel() = default;

    virtual std::size_t read_some(std::uint8_t* dst, std::size_t max,
                                  Deadline deadline) = 0;
    virtual void write_all(std::span<const std::uint8_t> data) = 0;
    virtual void close_write() = 0;
};

// In-memory pipe for tests and loopback sessions. Thread-safe; the writer
// and reader may live on different threads or the same one.
class LoopbackChannel : public ByteChannel {
public:
    std::size_t read_some(std::uint8_t* dst, std::size_t max,
                          Deadline deadline) override {
        std::unique_lock lock(mutex_);
        const auto ready = [this] { return !buffer_.empty() || closed_; };
        if (deadline) {
            if (!available_.wait_until(lock, *deadline, ready))
                throw Timeout("loopback read deadline expired");
        } else {
            available_.wait(lock, ready);
        }
        if (buffer_.empty())
            return 0;  // closed
        const std::size_t take = std::min(max, buffer_.size());
        std::copy_n(buffer_.begin(), take, dst);
        buffer_.erase(buffer_.begin(), buffer_.begin() + std::ptrdiff_t(take));
        return take;
    }

    void write_all(std::span<const std::uint8_t> data) override {
        std::lock_guard lock(mutex_);
        if (closed_)
            throw Error("write to a closed loopback channel");
        buffer_.insert(buffer_.end(), data.begin(), data.end());
        available_.notify_all();
    }

    void close_write() override {
        std::lock_guard lock(mutex_);
        closed_ = true;
        available_.notify_all();
    }

private:
    std::mutex mutex_;
    std::condition_variable available_;
    std::deque<std::uint8_t> buffer_;
    bool closed_ = false;
};

namespace detail {

class Socket {
public:
    Socket() = default;
    explicit Socket(int fd) : fd_(fd) {}
    Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
    Socket& operator=(Socket&& other) noexcept {
        if (this != &other) {
            reset();
            fd_ = std::exchange(other.fd_, -1);
        }
        return *this;
    }
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket() { reset(); }

    int get() const { return fd_; }
    bool valid() const { return fd_ >= 0; }

    void reset() {
        if (fd_ >= 0) {
            ::close(fd_);
            fd_ = -1;
        }
    }

private:
    int fd_ = -1;
};

inline int remaining_ms(Deadline deadline) {
    if (!deadline)
        return -1;  // poll: wait forever
    const auto left = *deadline - std::chrono::steady_clock::now();
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(left).count();
    return ms <= 0 ? 0 : int(std::min<long long>(ms, INT32_MAX));
}

}  // namespace detail

// Stream-socket channel. Construct with connect(), or adopt an accepted fd.
class TcpChannel : public ByteChannel {
public:
    explicit TcpChannel(detail::Socket socket) : socket_(std::move(socket)) {}

    static TcpChannel connect(const std::string& host, std::uint16_t port) {
        addrinfo hints{};
        hints.ai_family = AF_UNSPEC;
        hints.ai_socktype = SOCK_STREAM;
        addrinfo* results = nullptr;
        const std::string service = std::to_string(port);
        if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &results) != 0)
            throw SocketError("cannot resolve " + host);

        detail::Socket sock;
        for (addrinfo* ai = results; ai; ai = ai->ai_next) {
            detail::Socket candidate(
                ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
            if (!candidate.valid())
                continue;
            if (::connect(candidate.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
                sock = std::move(candidate);
                break;
            }
        }
        ::freeaddrinfo(results);
        if (!sock.valid())
            throw SocketError("cannot connect to " + host + ":" + service);
        return TcpChannel(std::move(sock));
    }

    std::size_t read_some(std::uint8_t* dst, std::size_t max,
                          Deadline deadline) override {
        pollfd pfd{socket_.get(), POLLIN, 0};
        const int rc = ::poll(&pfd, 1, detail::remaining_ms(deadline));
        if (rc < 0)
            throw SocketError("poll failed: " + std::string(strerror(errno)));
        if (rc == 0)
            throw Timeout("socket read deadline expired");
        const ssize_t got = ::recv(socket_.get(), dst, max, 0);
        if (got < 0)
            throw SocketError("recv failed: " + std::string(strerror(errno)));
        return std::size_t(got);
    }

    void write_all(std::span<const std::uint8_t> data) override {
        std::size_t sent = 0;
        while (sent < data.size()) {
            const ssize_t n = ::send(socket_.get(), data.data() + sent,
                                     data.size() - sent, MSG_NOSIGNAL);
            if (n < 0)
                throw SocketError("send failed: " +
                                  std::string(strerror(errno)));
            sent += std::size_t(n);
        }
    }

    void close_write() override { ::shutdown(socket_.get(), SHUT_WR); }

private:
    detail::Socket socket_;
};

class TcpListener {
public:
    explicit TcpListener(std::uint16_t port) {
        socket_ = detail::Socket(::socket(AF_INET, SOCK_STREAM, 0));
        if (!socket_.valid())
            throw SocketError("cannot create socket");
        const int yes = 1;
        ::setsockopt(socket_.get(), SOL_SOCKET, SO_REUSEADDR, &yes,
                     sizeof(yes));
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_addr.s_addr = htonl(INADDR_ANY);
        addr.sin_port = htons(port);
        if (::bind(socket_.get(), reinterpret_cast<sockaddr*>(&addr),
                   sizeof(addr)) != 0)
            throw SocketError("cannot bind port " + std::to_string(port) +
                              ": " + strerror(errno));
        if (::listen(socket_.get(), 1) != 0)
            throw SocketError("cannot listen on port " + std::to_string(port));
    }

    TcpChannel accept(Deadline deadline = std::nullopt) {
        pollfd pfd{socket_.get(), POLLIN, 0};
        const int rc = ::poll(&pfd, 1, detail::remaining_ms(deadline));
        if (rc < 0)
            throw SocketError("poll failed: " + std::string(strerror(errno)));
        if (rc == 0)
            throw Timeout("no connection before the deadline");
        const int fd = ::accept(socket_.get(), nullptr, nullptr);
        if (fd < 0)
            throw SocketError("accept failed: " +
                              std::string(strerror(errno)));
        return TcpChannel(detail::Socket(fd));
    }

private:
    detail::Socket socket_;
};

// Listener wrapped as a channel: the connection is accepted lazily on the
// first read, so a receive session can be set up before any peer dials in.
class TcpServerChannel : public ByteChannel {
public:
    explicit TcpServerChannel(std::uint16_t port) : listener_(port) {}

    std::size_t read_some(std::uint8_t* dst, std::size_t max,
                          Deadline deadline) override {
        if (!accepted_)
            accepted_.emplace(listener_.accept(deadline));
        return accepted_->read_some(dst, max, deadline);
    }

    void write_all(std::span<const std::uint8_t> data) override {
        if (!accepted_)
            throw SocketError("no peer connected yet");
        accepted_->write_all(data);
    }

    void close_write() override {
        if (accepted_)
            accepted_->close_write();
    }

private:
    TcpListener listener_;
    std::optional<TcpChannel> accepted_;
};

// ---------------------------------------------------------------------------
// Frame I/O over channels

inline void write_frame(ByteChannel& channel, FrameKind kind,
                        std::span<const std::uint8_t> body) {
    const std::vector<std::uint8_t> encoded = encode_frame(kind, body);
    channel.write_all(encoded);
}

inline Frame read_frame(ByteChannel& channel, Deadline deadline = std::nullopt) {
    std::vector<std::uint8_t> buf;
    std::uint8_t scratch[4096];

    const auto fill_to = [&](std::size_t want) {
        while (buf.size() < want) {
            const std::size_t got = channel.read_some(
                scratch, std::min(sizeof(scratch), want - buf.size()),
                deadline);
            if (got == 0)
                throw Truncated("channel closed mid-frame");
            buf.insert(buf.end(), scratch, scratch + got);
        }
    };

    fill_to(5);
    const std::uint8_t kind = buf[0];
    if (kind != std::uint8_t(FrameKind::Image) &&
        kind != std::uint8_t(FrameKind::Payload))
        throw BadKind("unknown frame kind " + std::to_string(kind));
    const std::uint64_t len = std::uint32_t(buf[1]) |
                              (std::uint32_t(buf[2]) << 8) |
                              (std::uint32_t(buf[3]) << 16) |
                              (std::uint32_t(buf[4]) << 24);
    fill_to(5 + len + 4);
    return decode_frame(buf);
}

// ---------------------------------------------------------------------------
// Split-channel sessions

inline constexpr std::chrono::milliseconds kDefaultReceiveTimeout{30000};

// Join point of the two channels; each slot is written at most once.
struct SessionState {
    std::optional<std::vector<std::uint8_t>> received_image;
    std::optional<std::vector<std::uint8_t>> received_payload;

    bool complete() const { return received_image && received_payload; }

    void store(Frame frame) {
        auto& slot = frame.kind == FrameKind::Image ? received_image
                                                    : received_payload;
        if (!slot)
            slot = std::move(frame.body);
    }
};

// Decodes a joined session: image bytes are parsed as a 4-bpp BMP and read
// in RawIndex mode (the sender transmits exported grey bitmaps), the
// payload is deserialized, and the message reassembled.
inline Message decode_session(const SessionState& session) {
    if (!session.complete())
        throw Incomplete("session is missing a frame");
    const bmp4::Bmp4Image image = bmp4::parse_bmp(*session.received_image);
    const ReferenceImage ref =
        to_reference_image(image, PaletteMode::RawIndex);
    const payload::PayloadFile data =
        payload::deserialize(*session.received_payload);
    return unhide(data.records, ref);
}

namespace detail {

// Runs fn on its own thread, keeping whatever it throws.
template <typename Fn>
class ChannelWorker {
public:
    explicit ChannelWorker(Fn fn)
        : thread_([this, fn = std::move(fn)]() mutable {
              try {
                  fn();
              } catch (...) {
                  error_ = std::current_exception();
              }
          }) {}

    ~ChannelWorker() {
        if (thread_.joinable())
            thread_.join();
    }

    void join() { thread_.join(); }
    const std::exception_ptr& error() const { return error_; }

private:
    std::exception_ptr error_;
    std::thread thread_;
};

// Rethrows a channel failure with the channel named, keeping transport
// error types intact so callers can still classify them.
[[noreturn]] inline void rethrow_attributed(const std::exception_ptr& error,
                                            const std::string& channel) {
    try {
        std::rethrow_exception(error);
    } catch (const Timeout& e) {
        throw Timeout(channel + ": " + e.what());
    } catch (const BadKind& e) {
        throw BadKind(channel + ": " + e.what());
    } catch (const Truncated& e) {
        throw Truncated(channel + ": " + e.what());
    } catch (const ChecksumMismatch& e) {
        throw ChecksumMismatch(channel + ": " + e.what());
    } catch (const SocketError& e) {
        throw SocketError(channel + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(channel + ": " + e.what());
    }
}

}  // namespace detail

// Writes the image frame to channel A and the payload frame to channel B.
// The writes run on independent threads; neither orders before the other.
inline void send_session(std::span<const std::uint8_t> image_bytes,
                         std::span<const std::uint8_t> payload_bytes,
                         ByteChannel& channel_a, ByteChannel& channel_b) {
    detail::ChannelWorker image_worker([&] {
        write_frame(channel_a, FrameKind::Image, image_bytes);
        channel_a.close_write();
    });
    detail::ChannelWorker payload_worker([&] {
        write_frame(channel_b, FrameKind::Payload, payload_bytes);
        channel_b.close_write();
    });
    image_worker.join();
    payload_worker.join();
    if (image_worker.error())
        detail::rethrow_attributed(image_worker.error(), "channel A");
    if (payload_worker.error())
        detail::rethrow_attributed(payload_worker.error(), "channel B");
}

// Reads one frame from each channel concurrently (arrival order does not
// matter), joins them, and decodes. With fewer than two frames by the
// deadline the result is Incomplete and no message bytes are produced.
inline Message receive_session(
    ByteChannel& channel_a, ByteChannel& channel_b,
    std::chrono::milliseconds timeout = kDefaultReceiveTimeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;

    SessionState session;
    std::mutex session_mutex;

    const auto reader = [&](ByteChannel& channel) {
        return [&session, &session_mutex, &channel, deadline] {
            Frame frame = read_frame(channel, deadline);
            std::lock_guard lock(session_mutex);
            session.store(std::move(frame));
        };
    };

    detail::ChannelWorker worker_a(reader(channel_a));
    detail::ChannelWorker worker_b(reader(channel_b));
    worker_a.join();
    worker_b.join();

    if (!session.complete()) {
        // Surface a real channel fault over the generic timeout.
        for (const auto& [error, name] :
             {std::pair(worker_a.error(), "channel A"),
              std::pair(worker_b.error(), "channel B")}) {
            if (!error)
                continue;
            try {
                std::rethrow_exception(error);
            } catch (const Timeout&) {
                continue;
            } catch (...) {
                detail::rethrow_attributed(error, name);
            }
        }
        throw Incomplete("received " +
                         std::to_string(int(bool(session.received_image)) +
                                        int(bool(session.received_payload))) +
                         " of 2 frames before the deadline");
    }
    return decode_session(session);
}

}  // namespace rstego::transport

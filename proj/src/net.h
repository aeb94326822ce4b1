#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace apiary {

// Byte-oriented connection. Every honeypot handler is written against this
// interface, so tests can drive a handler with an in-memory stream and the
// fuzz harness never needs a socket.
class ByteStream {
public:
    virtual ~ByteStream() = default;

    // >0 bytes read, 0 on orderly EOF, <0 on error/timeout.
    virtual int read_some(char* buf, std::size_t len) = 0;
    virtual bool write_all(std::string_view data) = 0;
    virtual void close() = 0;

    virtual std::string peer_addr() const = 0;
    virtual int peer_port() const = 0;

    // total bytes successfully written; feeds session_close bytes_served
    std::int64_t bytes_written() const { return bytes_written_; }

protected:
    std::int64_t bytes_written_ = 0;
};

class TcpStream : public ByteStream {
public:
    explicit TcpStream(int fd, std::string peer_addr = "", int peer_port = 0);
    ~TcpStream() override;
    TcpStream(const TcpStream&) = delete;
    TcpStream& operator=(const TcpStream&) = delete;

    int read_some(char* buf, std::size_t len) override;
    bool write_all(std::string_view data) override;
    void close() override;

    std::string peer_addr() const override { return peer_addr_; }
    int peer_port() const override { return peer_port_; }

    void set_read_timeout_ms(int ms);
    int fd() const { return fd_; }

    // wakes a read blocked in another thread without releasing the
    // descriptor; the owning thread still destructs/closes as usual
    void shutdown_io();

private:
    int fd_;
    std::string peer_addr_;
    int peer_port_;
};

// Test stream: a fixed input buffer, captured output.
class MemStream : public ByteStream {
public:
    explicit MemStream(std::string input, std::string peer_addr = "10.0.0.9",
                       int peer_port = 51000)
        : input_(std::move(input)),
          peer_addr_(std::move(peer_addr)),
          peer_port_(peer_port) {}

    int read_some(char* buf, std::size_t len) override;
    bool write_all(std::string_view data) override;
    void close() override { closed_ = true; }

    std::string peer_addr() const override { return peer_addr_; }
    int peer_port() const override { return peer_port_; }

    const std::string& output() const { return output_; }
    // fail writes after this many bytes (simulated client disconnect)
    void set_write_limit(std::int64_t limit) { write_limit_ = limit; }

private:
    std::string input_;
    std::size_t pos_ = 0;
    std::string output_;
    std::string peer_addr_;
    int peer_port_;
    bool closed_ = false;
    std::int64_t write_limit_ = -1;
};

class TcpListener {
public:
    TcpListener() = default;
    ~TcpListener();
    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    // binds and listens; returns false with message on failure
    bool open(const std::string& bind_addr, int port, std::string& error);
    // nullptr on error (including listener shutdown)
    std::unique_ptr<TcpStream> accept();
    void close();

    int bound_port() const { return bound_port_; }
    bool is_open() const { return fd_ >= 0; }

private:
    int fd_ = -1;
    int bound_port_ = 0;
};

// nullptr + error message on failure
std::unique_ptr<TcpStream> tcp_connect(const std::string& host, int port,
                                       int timeout_ms, std::string& error);

// Buffered line reader over a ByteStream. Lines end at '\n'; a trailing
// '\r' is stripped, so both CRLF and bare LF framing are accepted.
class LineReader {
public:
    explicit LineReader(ByteStream& stream, std::size_t max_line = 4096)
        : stream_(stream), max_line_(max_line) {}

    // nullopt on EOF/error with nothing buffered. A line longer than
    // max_line is returned in max_line-sized pieces.
    std::optional<std::string> read_line();

    // raw bytes remaining in the buffer (peeked but unconsumed), capped at
    // max_bytes so pipelined follow-up data stays readable
    std::string take_buffered(std::size_t max_bytes = SIZE_MAX);

    ByteStream& stream() { return stream_; }

private:
    ByteStream& stream_;
    std::size_t max_line_;
    std::string buf_;
    bool eof_ = false;
};

}  // namespace apiary

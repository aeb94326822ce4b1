#include "net.h"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstring>

namespace apiary {

namespace {

struct SigpipeSuppressor {
    SigpipeSuppressor() { std::signal(SIGPIPE, SIG_IGN); }
};
// write_all on a closed socket must not kill the process
SigpipeSuppressor g_sigpipe_suppressor;

std::string sockaddr_to_string(const sockaddr_storage& ss, int& port) {
    char buf[INET6_ADDRSTRLEN] = {0};
    if (ss.ss_family == AF_INET) {
        const auto* sin = reinterpret_cast<const sockaddr_in*>(&ss);
        inet_ntop(AF_INET, &sin->sin_addr, buf, sizeof(buf));
        port = ntohs(sin->sin_port);
    } else if (ss.ss_family == AF_INET6) {
        const auto* sin6 = reinterpret_cast<const sockaddr_in6*>(&ss);
        inet_ntop(AF_INET6, &sin6->sin6_addr, buf, sizeof(buf));
        port = ntohs(sin6->sin6_port);
    }
    return buf;
}

}  // namespace

TcpStream::TcpStream(int fd, std::string peer_addr, int peer_port)
    : fd_(fd), peer_addr_(std::move(peer_addr)), peer_port_(peer_port) {
    if (fd_ >= 0 && peer_addr_.empty()) {
        sockaddr_storage ss{};
        socklen_t len = sizeof(ss);
        if (getpeername(fd_, reinterpret_cast<sockaddr*>(&ss), &len) == 0) {
            peer_addr_ = sockaddr_to_string(ss, peer_port_);
        }
    }
}

TcpStream::~TcpStream() { close(); }

int TcpStream::read_some(char* buf, std::size_t len) {
    if (fd_ < 0) return -1;
    for (;;) {
        ssize_t n = ::recv(fd_, buf, len, 0);
        if (n >= 0) return static_cast<int>(n);
        if (errno == EINTR) continue;
        return -1;
    }
}

bool TcpStream::write_all(std::string_view data) {
    if (fd_ < 0) return false;
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::send(fd_, p, left, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        p += n;
        left -= static_cast<std::size_t>(n);
        bytes_written_ += n;
    }
    return true;
}

void TcpStream::close() {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

void TcpStream::shutdown_io() {
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

void TcpStream::set_read_timeout_ms(int ms) {
    if (fd_ < 0) return;
    timeval tv{};
    tv.tv_sec = ms / 1000;
    tv.tv_usec = (ms % 1000) * 1000;
    setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
}

int MemStream::read_some(char* buf, std::size_t len) {
    if (closed_) return -1;
    if (pos_ >= input_.size()) return 0;
    std::size_t n = std::min(len, input_.size() - pos_);
    std::memcpy(buf, input_.data() + pos_, n);
    pos_ += n;
    return static_cast<int>(n);
}

bool MemStream::write_all(std::string_view data) {
    if (closed_) return false;
    if (write_limit_ >= 0 &&
        bytes_written_ + static_cast<std::int64_t>(data.size()) > write_limit_) {
        std::size_t room = static_cast<std::size_t>(
            std::max<std::int64_t>(0, write_limit_ - bytes_written_));
        output_.append(data.substr(0, room));
        bytes_written_ += static_cast<std::int64_t>(room);
        return false;
    }
    output_.append(data);
    bytes_written_ += static_cast<std::int64_t>(data.size());
    return true;
}

TcpListener::~TcpListener() { close(); }

bool TcpListener::open(const std::string& bind_addr, int port, std::string& error) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE | AI_NUMERICHOST | AI_NUMERICSERV;

    addrinfo* res = nullptr;
    std::string service = std::to_string(port);
    int rc = getaddrinfo(bind_addr.empty() ? nullptr : bind_addr.c_str(),
                         service.c_str(), &hints, &res);
    if (rc != 0) {
        error = gai_strerror(rc);
        return false;
    }

    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        int one = 1;
        setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
            break;
        }
        error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0) {
        if (error.empty()) error = "no usable address";
        return false;
    }

    sockaddr_storage ss{};
    socklen_t len = sizeof(ss);
    if (getsockname(fd, reinterpret_cast<sockaddr*>(&ss), &len) == 0) {
        int p = 0;
        sockaddr_to_string(ss, p);
        bound_port_ = p;
    } else {
        bound_port_ = port;
    }
    fd_ = fd;
    return true;
}

std::unique_ptr<TcpStream> TcpListener::accept() {
    if (fd_ < 0) return nullptr;
    for (;;) {
        sockaddr_storage ss{};
        socklen_t len = sizeof(ss);
        int cfd = ::accept(fd_, reinterpret_cast<sockaddr*>(&ss), &len);
        if (cfd < 0) {
            if (errno == EINTR) continue;
            return nullptr;
        }
        int port = 0;
        std::string addr = sockaddr_to_string(ss, port);
        return std::make_unique<TcpStream>(cfd, addr, port);
    }
}

void TcpListener::close() {
    if (fd_ >= 0) {
        // shutdown wakes any thread blocked in accept()
        ::shutdown(fd_, SHUT_RDWR);
        ::close(fd_);
        fd_ = -1;
    }
}

std::unique_ptr<TcpStream> tcp_connect(const std::string& host, int port,
                                       int timeout_ms, std::string& error) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;

    addrinfo* res = nullptr;
    std::string service = std::to_string(port);
    int rc = getaddrinfo(host.c_str(), service.c_str(), &hints, &res);
    if (rc != 0) {
        error = gai_strerror(rc);
        return nullptr;
    }

    int fd = -1;
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        timeval tv{};
        tv.tv_sec = timeout_ms / 1000;
        tv.tv_usec = (timeout_ms % 1000) * 1000;
        setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
        setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
        error = std::strerror(errno);
        ::close(fd);
        fd = -1;
    }
    freeaddrinfo(res);
    if (fd < 0) {
        if (error.empty()) error = "connect failed";
        return nullptr;
    }
    auto stream = std::make_unique<TcpStream>(fd);
    stream->set_read_timeout_ms(timeout_ms);
    return stream;
}

std::optional<std::string> LineReader::read_line() {
    for (;;) {
        auto nl = buf_.find('\n');
        if (nl != std::string::npos) {
            std::string line = buf_.substr(0, nl);
            buf_.erase(0, nl + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return line;
        }
        if (buf_.size() >= max_line_) {
            std::string line = buf_.substr(0, max_line_);
            buf_.erase(0, max_line_);
            return line;
        }
        if (eof_) {
            if (buf_.empty()) return std::nullopt;
            std::string line = std::move(buf_);
            buf_.clear();
            return line;
        }
        char chunk[1024];
        int n = stream_.read_some(chunk, sizeof(chunk));
        if (n <= 0) {
            eof_ = true;
            continue;
        }
        buf_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::string LineReader::take_buffered(std::size_t max_bytes) {
    if (buf_.size() <= max_bytes) {
        std::string out = std::move(buf_);
        buf_.clear();
        return out;
    }
    std::string out = buf_.substr(0, max_bytes);
    buf_.erase(0, max_bytes);
    return out;
}

}  // namespace apiary

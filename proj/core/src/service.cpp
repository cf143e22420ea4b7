#include "jam/service.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "jam/server.hpp"

namespace jam {
namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

bool write_all(int fd, std::string_view bytes) {
    while (!bytes.empty()) {
        const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        bytes.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

std::runtime_error socket_error(const std::string& what) {
    return std::runtime_error(what + ": " + std::strerror(errno));
}

}  // namespace

Connection::Connection(const AgentRegistry& agents, const MonotonicClock& clock, std::uint64_t default_seed)
    : agents_(agents), clock_(clock), default_seed_(default_seed) {}

std::string Connection::on_bytes(std::string_view bytes) {
    if (closed_) return {};
    decoder_.feed(bytes);
    std::string out;
    try {
        while (auto body = decoder_.next()) out += encode_frame(handle_body(*body));
    } catch (const KvError& e) {
        out += encode_frame(encode(WireError{WireError::Code::malformed, std::string("framing: ") + e.what()}));
        closed_ = true;
    }
    return out;
}

std::string Connection::handle_body(std::string_view body) {
    auto decoded = decode(body);
    if (auto* err = std::get_if<WireError>(&decoded)) return encode(*err);
    auto* req = std::get_if<JamRequest>(&std::get<WireMessage>(decoded));
    if (req == nullptr) return encode(WireError{WireError::Code::malformed, "expected a request"});
    if (!req->seed_present) {
        req->settings.seed = default_seed_;
        req->seed_present = true;
    }
    if (auto it = last_target_.find(req->session_id); it != last_target_.end() && req->target_frame < it->second) {
        return encode(WireError{WireError::Code::inconsistent_history,
                                "target_frame " + std::to_string(req->target_frame) +
                                    " precedes the last served target " + std::to_string(it->second)});
    }
    HandlerResult result = handle_request(*req, agents_, clock_);
    if (auto* resp = std::get_if<JamResponse>(&result)) {
        last_target_[req->session_id] = req->target_frame;
        return encode(*resp);
    }
    return encode(std::get<WireError>(result));
}

void parse_listen(std::string_view text, ServiceConfig& config) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw std::invalid_argument("listen address must be host:port");
    std::string host(text.substr(0, colon));
    std::uint64_t port = 0;
    try {
        port = parse_uint(text.substr(colon + 1));
    } catch (const KvError&) {
        throw std::invalid_argument("bad listen port in '" + std::string(text) + "'");
    }
    if (port > 65535) throw std::invalid_argument("listen port out of range");
    config.host = host.empty() ? "0.0.0.0" : host;
    config.port = static_cast<std::uint16_t>(port);
}

void load_service_config(std::string_view text, ServiceConfig& config) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(content).substr(0, eq));
        const std::string value = trim(std::string_view(content).substr(eq + 1));
        if (key == "listen") {
            parse_listen(value, config);
        } else if (key == "seed") {
            try {
                config.seed = parse_uint(value);
            } catch (const KvError&) {
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": bad seed");
            }
        } else if (key == "models") {
            std::string spaced = value;
            for (char& c : spaced) {
                if (c == ',') c = ' ';
            }
            config.models.clear();
            std::istringstream ids(spaced);
            for (std::string id; ids >> id;) config.models.push_back(id);
            if (config.models.empty()) throw std::invalid_argument("config: models must not be empty");
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
}

JamService::JamService(ServiceConfig config)
    : config_(std::move(config)), agents_(AgentRegistry::with_ids(config_.models)) {}

JamService::~JamService() { stop(); }

void JamService::start() {
    if (running_) return;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* found = nullptr;
    const std::string port = std::to_string(config_.port);
    if (int rc = ::getaddrinfo(config_.host.c_str(), port.c_str(), &hints, &found); rc != 0) {
        throw std::runtime_error("cannot resolve " + config_.host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, ::freeaddrinfo);

    listen_fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
    if (listen_fd_ < 0) throw socket_error("socket");
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    if (::bind(listen_fd_, found->ai_addr, found->ai_addrlen) < 0 || ::listen(listen_fd_, 16) < 0) {
        auto err = socket_error("bind " + config_.host + ":" + port);
        ::close(std::exchange(listen_fd_, -1));
        throw err;
    }
    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &len);
    bound_port_ = ntohs(bound.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void JamService::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(std::exchange(listen_fd_, -1));
    if (acceptor_.joinable()) acceptor_.join();
    std::vector<std::thread> workers;
    {
        std::lock_guard lock(mutex_);
        for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
        workers.swap(workers_);
    }
    for (auto& t : workers) t.join();
}

void JamService::accept_loop() {
    while (running_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        int yes = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
        std::lock_guard lock(mutex_);
        if (!running_) {
            ::close(fd);
            return;
        }
        client_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve(fd); });
    }
}

void JamService::serve(int fd) {
    Connection conn(agents_, clock_, config_.seed);
    char buf[64 * 1024];
    while (!conn.closed()) {
        const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) break;
        if (!write_all(fd, conn.on_bytes(std::string_view(buf, static_cast<std::size_t>(n))))) break;
    }
    std::lock_guard lock(mutex_);
    std::erase(client_fds_, fd);
    ::close(fd);
}

WireClient::~WireClient() { close(); }

void WireClient::connect(const std::string& host, std::uint16_t port) {
    close();
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &found); rc != 0) {
        throw std::runtime_error("cannot resolve " + host + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(found, ::freeaddrinfo);
    fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
    if (fd_ < 0) throw socket_error("socket");
    if (::connect(fd_, found->ai_addr, found->ai_addrlen) < 0) {
        auto err = socket_error("connect " + host + ":" + std::to_string(port));
        close();
        throw err;
    }
    int yes = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof yes);
    decoder_ = FrameDecoder();
}

void WireClient::close() {
    if (fd_ >= 0) ::close(std::exchange(fd_, -1));
}

void WireClient::send(const WireMessage& msg) { send_raw(encode_frame(encode(msg))); }

void WireClient::send_raw(std::string_view bytes) {
    if (fd_ < 0) throw std::runtime_error("not connected");
    if (!write_all(fd_, bytes)) throw socket_error("send");
}

std::variant<WireMessage, WireError> WireClient::receive() {
    if (fd_ < 0) throw std::runtime_error("not connected");
    char buf[64 * 1024];
    while (true) {
        if (auto body = decoder_.next()) return decode(*body);
        const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n < 0) throw socket_error("recv");
        if (n == 0) throw std::runtime_error("connection closed by peer");
        decoder_.feed(std::string_view(buf, static_cast<std::size_t>(n)));
    }
}

std::variant<WireMessage, WireError> WireClient::roundtrip(const WireMessage& msg) {
    send(msg);
    return receive();
}

}  // namespace jam

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "jam/agents.hpp"
#include "jam/clock.hpp"
#include "jam/kv.hpp"
#include "jam/wire.hpp"

namespace jam {

/// Protocol state of one client connection, independent of the transport.
/// Requests without a seed get the service default. Within a connection, a
/// request whose target_frame is below the last one served for the same
/// session is rejected as INCONSISTENT_HISTORY; an equal target is a retry.
class Connection {
public:
    Connection(const AgentRegistry& agents, const MonotonicClock& clock, std::uint64_t default_seed);

    /// Consumes received bytes and returns the framed replies to send.
    /// A framing error produces one MALFORMED reply and closes the connection.
    std::string on_bytes(std::string_view bytes);

    /// Serves one message body and returns the reply body.
    std::string handle_body(std::string_view body);

    bool closed() const { return closed_; }

private:
    const AgentRegistry& agents_;
    const MonotonicClock& clock_;
    std::uint64_t default_seed_;
    FrameDecoder decoder_;
    std::map<std::string, FrameIndex, std::less<>> last_target_;
    bool closed_ = false;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    std::uint16_t port = 7070;  // 0 picks a free port
    std::uint64_t seed = 0;
    std::vector<std::string> models = AgentRegistry::known_ids();

    bool operator==(const ServiceConfig&) const = default;
};

/// "host:port" or ":port". Throws std::invalid_argument.
void parse_listen(std::string_view text, ServiceConfig& config);

/// `key = value` lines with '#' comments. Keys: listen, seed, models
/// (space or comma separated). Unset keys keep their current value.
/// Throws std::invalid_argument.
void load_service_config(std::string_view text, ServiceConfig& config);

/// TCP server with one thread per connection. Sessions are independent;
/// the handler itself is stateless.
class JamService {
public:
    explicit JamService(ServiceConfig config);
    ~JamService();
    JamService(const JamService&) = delete;
    JamService& operator=(const JamService&) = delete;

    /// Binds and starts accepting. Throws std::runtime_error on socket errors.
    void start();
    /// Bound port (useful when the config asked for port 0).
    std::uint16_t port() const { return bound_port_; }
    /// Closes the listener and every open connection, then joins.
    void stop();

private:
    void accept_loop();
    void serve(int fd);

    ServiceConfig config_;
    AgentRegistry agents_;
    SteadyClock clock_;
    int listen_fd_ = -1;
    std::uint16_t bound_port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex mutex_;
    std::vector<int> client_fds_;
    std::vector<std::thread> workers_;
};

/// Blocking client for the framed wire protocol.
class WireClient {
public:
    WireClient() = default;
    ~WireClient();
    WireClient(const WireClient&) = delete;
    WireClient& operator=(const WireClient&) = delete;

    /// Throws std::runtime_error when the connection fails.
    void connect(const std::string& host, std::uint16_t port);
    void close();
    bool connected() const { return fd_ >= 0; }

    void send(const WireMessage& msg);
    void send_raw(std::string_view bytes);
    /// Blocks for the next message. Throws std::runtime_error if the peer closes.
    std::variant<WireMessage, WireError> receive();
    std::variant<WireMessage, WireError> roundtrip(const WireMessage& msg);

private:
    int fd_ = -1;
    FrameDecoder decoder_;
};

}  // namespace jam

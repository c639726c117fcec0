#include "gazeprompt/server.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <memory>

#include "gazeprompt/error.hpp"
#include "gazeprompt/formats.hpp"
#include "gazeprompt/websocket.hpp"

namespace gazeprompt {

namespace {

constexpr int kPollTimeoutMs = 250;

enum class Framing { pending, lines, websocket };

struct Connection {
    int fd = -1;
    std::unique_ptr<Session> session;
    Framing framing = Framing::pending;
    std::string inbox;
    std::string outbox;
    std::string fragments;  // unfinished WebSocket message
    bool closing = false;
};

Micros wall_now(std::chrono::steady_clock::time_point origin) {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - origin).count();
}

void queue(Connection& c, const std::vector<Json>& messages) {
    for (const auto& m : messages) {
        if (c.framing == Framing::websocket) {
            c.outbox += websocket_frame(dump_line(m));
        } else {
            c.outbox += dump_line(m);
            c.outbox += '\n';
        }
    }
}

// A connection whose first bytes are an HTTP GET is upgraded to WebSocket; anything
// else is newline-delimited.
void detect_framing(Connection& c) {
    constexpr std::string_view get = "GET ";
    const std::size_t n = std::min(c.inbox.size(), get.size());
    if (c.inbox.compare(0, n, get.substr(0, n)) != 0) {
        c.framing = Framing::lines;
        return;
    }
    if (n < get.size()) return;
    const std::size_t end = c.inbox.find("\r\n\r\n");
    if (end == std::string::npos) return;
    const std::string request = c.inbox.substr(0, end + 4);
    c.inbox.erase(0, end + 4);
    c.outbox += websocket_handshake_response(request);
    c.framing = Framing::websocket;
}

void handle_lines(Connection& c, std::chrono::steady_clock::time_point origin) {
    std::size_t pos;
    while (!c.session->ended() && (pos = c.inbox.find('\n')) != std::string::npos) {
        std::string line = c.inbox.substr(0, pos);
        c.inbox.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        queue(c, c.session->handle_line(line, wall_now(origin)));
    }
}

void handle_frames(Connection& c, std::size_t max_bytes, std::chrono::steady_clock::time_point origin) {
    while (!c.session->ended() && !c.closing) {
        auto frame = take_websocket_frame(c.inbox, max_bytes);
        if (!frame) return;
        if (!frame->masked) throw Error(ErrorCode::protocol, "client WebSocket frames must be masked");
        switch (frame->opcode) {
            case WsOpcode::ping:
                c.outbox += websocket_frame(frame->payload, WsOpcode::pong);
                continue;
            case WsOpcode::pong:
                continue;
            case WsOpcode::close:
                c.outbox += websocket_frame("", WsOpcode::close);
                c.closing = true;
                return;
            case WsOpcode::text:
            case WsOpcode::binary:
            case WsOpcode::continuation:
                break;
            default:
                throw Error(ErrorCode::protocol, "unknown WebSocket opcode");
        }
        c.fragments += frame->payload;
        if (c.fragments.size() > max_bytes)
            throw Error(ErrorCode::protocol, "message exceeds " + std::to_string(max_bytes) + " bytes");
        if (!frame->fin) continue;
        std::string message = std::move(c.fragments);
        c.fragments.clear();
        // a message may carry several newline-separated protocol lines
        std::size_t start = 0;
        while (start <= message.size() && !c.session->ended()) {
            std::size_t end = message.find('\n', start);
            if (end == std::string::npos) end = message.size();
            std::string_view line(message.data() + start, end - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            if (!line.empty()) queue(c, c.session->handle_line(line, wall_now(origin)));
            start = end + 1;
        }
    }
}

bool flush_outbox(Connection& c) {
    while (!c.outbox.empty()) {
        const ssize_t n = ::send(c.fd, c.outbox.data(), c.outbox.size(), MSG_NOSIGNAL | MSG_DONTWAIT);
        if (n > 0) {
            c.outbox.erase(0, static_cast<std::size_t>(n));
            continue;
        }
        if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) return true;
        if (n < 0 && errno == EINTR) continue;
        return false;
    }
    return true;
}

void save_log(const ServerOptions& options, const Session& session) {
    if (!options.log_dir) return;
    std::filesystem::create_directories(*options.log_dir);
    write_file(std::filesystem::path(*options.log_dir) / (session.id() + ".jsonl"), session.log().text());
}

}  // namespace

void serve(const ServerOptions& options) {
    const int listener = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener < 0) throw Error(ErrorCode::io, std::string("socket: ") + std::strerror(errno));
    int yes = 1;
    ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(options.port));
    if (::inet_pton(AF_INET, options.bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(listener);
        throw Error(ErrorCode::io, "bad bind address " + options.bind_address);
    }
    if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listener, 16) < 0) {
        const std::string why = std::strerror(errno);
        ::close(listener);
        throw Error(ErrorCode::io, "cannot listen on port " + std::to_string(options.port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listener, reinterpret_cast<sockaddr*>(&addr), &len);
    if (options.on_listening) options.on_listening(ntohs(addr.sin_port));

    const auto origin = std::chrono::steady_clock::now();
    std::vector<std::unique_ptr<Connection>> conns;
    std::size_t next_id = 1;

    while (!(options.stop && options.stop->load())) {
        std::vector<pollfd> fds;
        fds.push_back({listener, POLLIN, 0});
        for (const auto& c : conns)
            fds.push_back({c->fd, static_cast<short>(POLLIN | (c->outbox.empty() ? 0 : POLLOUT)), 0});
        const int ready = ::poll(fds.data(), fds.size(), kPollTimeoutMs);
        if (ready < 0 && errno != EINTR) throw Error(ErrorCode::io, std::string("poll: ") + std::strerror(errno));

        if (ready > 0 && (fds[0].revents & POLLIN)) {
            const int fd = ::accept(listener, nullptr, nullptr);
            if (fd >= 0) {
                auto c = std::make_unique<Connection>();
                c->fd = fd;
                c->session = std::make_unique<Session>("s" + std::to_string(next_id++), options.settings);
                conns.push_back(std::move(c));
            }
        }

        for (std::size_t i = 0; i < conns.size(); ++i) {
            Connection& c = *conns[i];
            const short revents = i + 1 < fds.size() && fds[i + 1].fd == c.fd ? fds[i + 1].revents : 0;
            if (revents & (POLLIN | POLLHUP | POLLERR)) {
                char buf[65536];
                const ssize_t n = ::recv(c.fd, buf, sizeof buf, MSG_DONTWAIT);
                if (n > 0) {
                    c.inbox.append(buf, static_cast<std::size_t>(n));
                } else if (n == 0 || (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR)) {
                    c.closing = true;
                }
            }
            try {
                if (c.framing == Framing::pending) detect_framing(c);
                if (c.framing == Framing::lines) handle_lines(c, origin);
                if (c.framing == Framing::websocket) handle_frames(c, options.max_line_bytes, origin);
                if (!c.session->ended() && c.inbox.size() > options.max_line_bytes) {
                    c.inbox.clear();
                    queue(c, c.session->transport_error(
                                 "line exceeds " + std::to_string(options.max_line_bytes) + " bytes", wall_now(origin)));
                }
            } catch (const Error& e) {
                c.inbox.clear();
                if (c.framing == Framing::pending) c.framing = Framing::lines;
                if (!c.session->ended()) queue(c, c.session->transport_error(e.what(), wall_now(origin)));
            }
            queue(c, c.session->tick(wall_now(origin)));
            if (!flush_outbox(c)) c.closing = true;
            if (c.session->ended() && c.outbox.empty()) c.closing = true;
        }

        for (auto it = conns.begin(); it != conns.end();) {
            if ((*it)->closing) {
                flush_outbox(**it);
                save_log(options, *(*it)->session);
                ::close((*it)->fd);
                it = conns.erase(it);
            } else {
                ++it;
            }
        }
    }
    for (auto& c : conns) {
        save_log(options, *c->session);
        ::close(c->fd);
    }
    ::close(listener);
}

}  // namespace gazeprompt

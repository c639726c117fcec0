#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <thread>

#include "gazeprompt/error.hpp"
#include "gazeprompt/formats.hpp"
#include "gazeprompt/server.hpp"
#include "gazeprompt/websocket.hpp"
#include "support.hpp"

using namespace gazeprompt;

namespace {

struct RunningServer {
    std::atomic<bool> stop{false};
    std::atomic<int> port{0};
    std::thread thread;

    explicit RunningServer(ServerOptions opt) {
        opt.port = 0;
        opt.stop = &stop;
        opt.on_listening = [this](int p) { port = p; };
        thread = std::thread([opt] { serve(opt); });
        for (int i = 0; i < 500 && port == 0; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    ~RunningServer() {
        stop = true;
        thread.join();
    }
};

int connect_to(int port) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    ::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd);
        return -1;
    }
    return fd;
}

void send_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t n = ::send(fd, data.data() + off, data.size() - off, 0);
        if (n <= 0) return;
        off += static_cast<std::size_t>(n);
    }
}

// Reads until the server closes the connection.
std::vector<Json> read_all(int fd) {
    std::string buf;
    char chunk[4096];
    ssize_t n;
    while ((n = ::recv(fd, chunk, sizeof chunk, 0)) > 0) buf.append(chunk, static_cast<std::size_t>(n));
    std::vector<Json> out;
    std::size_t start = 0, pos;
    while ((pos = buf.find('\n', start)) != std::string::npos) {
        out.push_back(parse_json(buf.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

}  // namespace

TEST_CASE("socket round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "gazeprompt_server_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    ServerOptions opt;
    opt.log_dir = dir.string();
    RunningServer server(opt);
    REQUIRE(server.port != 0);

    const int fd = connect_to(server.port);
    REQUIRE(fd >= 0);
    const PageLayout l = gptest::ruled_layout(3);
    std::string script;
    std::int64_t seq = 0;
    script += make_message("hello", ++seq, {{"client", "socket"}}) + "\n";
    script += make_message("layout", ++seq, layout_payload(l)) + "\n";
    script += make_message("phase", ++seq, {{"phase", "reading"}, {"skip_calibration", true}}) + "\r\n";
    for (int i = 0; i < 60; ++i)
        script += make_message("gaze", ++seq, {{"t", 8333 * (i + 1)}, {"x", 300.0 + 2 * i}, {"y", 125.0}}) + "\n";
    script += make_message("phase", ++seq, {{"phase", "ended"}}) + "\n";
    send_all(fd, script);
    const auto msgs = read_all(fd);
    ::close(fd);

    bool fixation = false, following = false, passage = false;
    std::int64_t last_seq = 0;
    for (const auto& m : msgs) {
        CHECK(m["seq"].get<std::int64_t>() == last_seq + 1);
        last_seq = m["seq"].get<std::int64_t>();
        CHECK(m["type"] != "error");
        fixation |= m["type"] == "fixation_debug";
        following |= m["type"] == "behavior" && m["payload"]["kind"] == "following";
        passage |= m["type"] == "metrics" && m["payload"]["scope"] == "passage";
    }
    CHECK(fixation);
    CHECK(following);
    CHECK(passage);

    // the session log is written on close and replays identically
    std::filesystem::path log;
    for (int i = 0; i < 200 && log.empty(); ++i) {
        for (const auto& e : std::filesystem::directory_iterator(dir)) log = e.path();
        if (log.empty()) std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    REQUIRE_FALSE(log.empty());
    CHECK(log.extension() == ".jsonl");
    CHECK(replay_session_log(read_file(log)).identical());
}

TEST_CASE("oversized line ends the session") {
    ServerOptions opt;
    opt.max_line_bytes = 1024;
    RunningServer server(opt);
    REQUIRE(server.port != 0);
    const int fd = connect_to(server.port);
    REQUIRE(fd >= 0);
    send_all(fd, std::string(4096, 'x'));
    const auto msgs = read_all(fd);
    ::close(fd);
    REQUIRE(msgs.size() == 1);
    CHECK(msgs[0]["payload"]["code"] == "protocol");
    CHECK(msgs[0]["payload"]["fatal"] == true);
}

TEST_CASE("two clients get separate sessions") {
    RunningServer server(ServerOptions{});
    REQUIRE(server.port != 0);
    const int a = connect_to(server.port), b = connect_to(server.port);
    REQUIRE(a >= 0);
    REQUIRE(b >= 0);
    send_all(a, make_message("wave", 1, Json::object()) + "\n" + make_message("phase", 2, {{"phase", "ended"}}) + "\n");
    send_all(b, make_message("wave", 1, Json::object()) + "\n" + make_message("phase", 2, {{"phase", "ended"}}) + "\n");
    const auto ma = read_all(a), mb = read_all(b);
    ::close(a);
    ::close(b);
    REQUIRE(ma.size() == 1);
    REQUIRE(mb.size() == 1);
    CHECK(ma[0]["session"] != mb[0]["session"]);
    CHECK(ma[0]["payload"]["code"] == "unknown_type");
}

TEST_CASE("websocket handshake key") {
    // sample key and accept value from RFC 6455
    CHECK(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ==") == "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
    const std::string resp = websocket_handshake_response(
        "GET /chat HTTP/1.1\r\nHost: x\r\nUpgrade: WebSocket\r\nConnection: Upgrade\r\n"
        "sec-websocket-key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
    CHECK(resp.find("101 Switching Protocols") != std::string::npos);
    CHECK(resp.find("Sec-WebSocket-Accept: s3pPLMBiTxaQ9kYGzzhZRbK+xOo=\r\n") != std::string::npos);
    CHECK_THROWS_AS(websocket_handshake_response("GET / HTTP/1.1\r\nHost: x\r\n\r\n"), Error);
}

TEST_CASE("websocket frames") {
    for (std::size_t len : {0u, 5u, 125u, 126u, 65535u, 65536u, 70000u}) {
        std::string payload(len, 'a');
        for (std::size_t i = 0; i < len; ++i) payload[i] = static_cast<char>('a' + i % 26);
        std::string wire = websocket_frame(payload, WsOpcode::text, 0x37fa213du);
        // every strict prefix is incomplete
        for (std::size_t cut : {std::size_t{0}, std::size_t{1}, wire.size() / 2, wire.size() - 1}) {
            std::string part = wire.substr(0, cut);
            CHECK_FALSE(take_websocket_frame(part, 1 << 20));
        }
        wire += websocket_frame("next", WsOpcode::ping);
        auto f = take_websocket_frame(wire, 1 << 20);
        REQUIRE(f);
        CHECK(f->fin);
        CHECK(f->masked);
        CHECK(f->opcode == WsOpcode::text);
        CHECK(f->payload == payload);
        auto g = take_websocket_frame(wire, 1 << 20);
        REQUIRE(g);
        CHECK(g->opcode == WsOpcode::ping);
        CHECK(g->payload == "next");
        CHECK(wire.empty());
    }
    std::string big = websocket_frame(std::string(2000, 'x'));
    CHECK_THROWS_AS(take_websocket_frame(big, 1000), Error);
    std::string reserved("\xC1\x00", 2);
    CHECK_THROWS_AS(take_websocket_frame(reserved, 1000), Error);
}

TEST_CASE("websocket session") {
    RunningServer server(ServerOptions{});
    REQUIRE(server.port != 0);
    const int fd = connect_to(server.port);
    REQUIRE(fd >= 0);
    send_all(fd, "GET / HTTP/1.1\r\nHost: localhost\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                 "Sec-WebSocket-Key: dGhlIHNhbXBsZSBub25jZQ==\r\nSec-WebSocket-Version: 13\r\n\r\n");
    const std::string hello = make_message("hello", 1, {{"client", "ws"}});
    const std::string wave = make_message("wave", 2, Json::object());
    // the second message is split over two fragments
    std::string first = websocket_frame(wave.substr(0, 10), WsOpcode::text, 0x01020304u);
    first[0] = static_cast<char>(first[0] & 0x7F);
    std::string rest = websocket_frame(wave.substr(10), WsOpcode::continuation, 0x05060708u);
    send_all(fd, websocket_frame(hello, WsOpcode::text, 0xa1b2c3d4u) + first + rest +
                     websocket_frame("ping", WsOpcode::ping, 7u) +
                     websocket_frame(make_message("phase", 3, {{"phase", "ended"}}), WsOpcode::text, 9u));
    std::string buf;
    char chunk[4096];
    ssize_t n;
    while ((n = ::recv(fd, chunk, sizeof chunk, 0)) > 0) buf.append(chunk, static_cast<std::size_t>(n));
    ::close(fd);
    const std::size_t head = buf.find("\r\n\r\n");
    REQUIRE(head != std::string::npos);
    CHECK(buf.find("Sec-WebSocket-Accept: s3pPLMBiTxaQ9kYGzzhZRbK+xOo=") < head);
    buf.erase(0, head + 4);
    std::vector<WsFrame> frames;
    while (auto f = take_websocket_frame(buf, 1 << 20)) frames.push_back(*f);
    CHECK(buf.empty());
    REQUIRE(frames.size() == 2);
    CHECK(frames[0].opcode == WsOpcode::text);
    CHECK_FALSE(frames[0].masked);
    CHECK(parse_json(frames[0].payload)["payload"]["code"] == "unknown_type");
    CHECK(frames[1].opcode == WsOpcode::pong);
    CHECK(frames[1].payload == "ping");
}

TEST_CASE("unmasked websocket frame is a protocol error") {
    RunningServer server(ServerOptions{});
    const int fd = connect_to(server.port);
    REQUIRE(fd >= 0);
    send_all(fd, "GET / HTTP/1.1\r\nUpgrade: websocket\r\nSec-WebSocket-Key: abc\r\n\r\n" +
                     websocket_frame(make_message("hello", 1, Json::object())));
    std::string buf;
    char chunk[4096];
    ssize_t n;
    while ((n = ::recv(fd, chunk, sizeof chunk, 0)) > 0) buf.append(chunk, static_cast<std::size_t>(n));
    ::close(fd);
    buf.erase(0, buf.find("\r\n\r\n") + 4);
    auto f = take_websocket_frame(buf, 1 << 20);
    REQUIRE(f);
    const Json m = parse_json(f->payload);
    CHECK(m["payload"]["code"] == "protocol");
    CHECK(m["payload"]["fatal"] == true);
}

#include "gazeprompt/websocket.hpp"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <algorithm>
#include <cctype>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string websocket_accept_key(std::string_view client_key) {
    const std::string input = std::string(client_key) + std::string(kGuid);
    unsigned char digest[SHA_DIGEST_LENGTH];
    SHA1(reinterpret_cast<const unsigned char*>(input.data()), input.size(), digest);
    unsigned char b64[4 * ((SHA_DIGEST_LENGTH + 2) / 3) + 1];
    const int n = EVP_EncodeBlock(b64, digest, SHA_DIGEST_LENGTH);
    return std::string(reinterpret_cast<char*>(b64), static_cast<std::size_t>(n));
}

std::string websocket_handshake_response(std::string_view request) {
    std::size_t pos = request.find("\r\n");
    if (pos == std::string_view::npos || request.substr(0, 4) != "GET ")
        throw Error(ErrorCode::protocol, "expected an HTTP GET upgrade request");
    std::string key;
    bool upgrade = false;
    while (true) {
        const std::size_t start = pos + 2;
        pos = request.find("\r\n", start);
        if (pos == std::string_view::npos || pos == start) break;
        const std::string_view line = request.substr(start, pos - start);
        const std::size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        const std::string name = lower(trim(line.substr(0, colon)));
        const std::string_view value = trim(line.substr(colon + 1));
        if (name == "sec-websocket-key") key = std::string(value);
        else if (name == "upgrade") upgrade = lower(value) == "websocket";
    }
    if (!upgrade || key.empty()) throw Error(ErrorCode::protocol, "not a WebSocket upgrade request");
    return "HTTP/1.1 101 Switching Protocols\r\n"
           "Upgrade: websocket\r\n"
           "Connection: Upgrade\r\n"
           "Sec-WebSocket-Accept: " +
           websocket_accept_key(key) + "\r\n\r\n";
}

std::optional<WsFrame> take_websocket_frame(std::string& buffer, std::size_t max_payload) {
    if (buffer.size() < 2) return std::nullopt;
    const auto b = [&](std::size_t i) { return static_cast<unsigned char>(buffer[i]); };
    if (b(0) & 0x70) throw Error(ErrorCode::protocol, "reserved WebSocket bits set");
    WsFrame f;
    f.fin = b(0) & 0x80;
    f.opcode = static_cast<WsOpcode>(b(0) & 0x0F);
    f.masked = b(1) & 0x80;
    std::uint64_t len = b(1) & 0x7F;
    std::size_t at = 2;
    if (len == 126) {
        if (buffer.size() < 4) return std::nullopt;
        len = (std::uint64_t{b(2)} << 8) | b(3);
        at = 4;
    } else if (len == 127) {
        if (buffer.size() < 10) return std::nullopt;
        len = 0;
        for (std::size_t i = 2; i < 10; ++i) len = (len << 8) | b(i);
        at = 10;
    }
    if (len > max_payload)
        throw Error(ErrorCode::protocol, "WebSocket frame exceeds " + std::to_string(max_payload) + " bytes");
    unsigned char mask[4] = {0, 0, 0, 0};
    if (f.masked) {
        if (buffer.size() < at + 4) return std::nullopt;
        for (int i = 0; i < 4; ++i) mask[i] = b(at + static_cast<std::size_t>(i));
        at += 4;
    }
    if (buffer.size() < at + len) return std::nullopt;
    f.payload = buffer.substr(at, static_cast<std::size_t>(len));
    if (f.masked)
        for (std::size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<char>(f.payload[i] ^ mask[i % 4]);
    buffer.erase(0, at + static_cast<std::size_t>(len));
    return f;
}

std::string websocket_frame(std::string_view payload, WsOpcode opcode, std::optional<std::uint32_t> mask) {
    std::string out;
    out += static_cast<char>(0x80 | static_cast<std::uint8_t>(opcode));
    const char mask_bit = mask ? static_cast<char>(0x80) : 0;
    const std::uint64_t len = payload.size();
    if (len < 126) {
        out += static_cast<char>(mask_bit | static_cast<char>(len));
    } else if (len <= 0xFFFF) {
        out += static_cast<char>(mask_bit | 126);
        out += static_cast<char>(len >> 8);
        out += static_cast<char>(len & 0xFF);
    } else {
        out += static_cast<char>(mask_bit | 127);
        for (int shift = 56; shift >= 0; shift -= 8) out += static_cast<char>((len >> shift) & 0xFF);
    }
    if (!mask) {
        out.append(payload);
        return out;
    }
    unsigned char m[4];
    for (int i = 0; i < 4; ++i) m[i] = static_cast<unsigned char>(*mask >> (24 - 8 * i));
    for (int i = 0; i < 4; ++i) out += static_cast<char>(m[i]);
    for (std::size_t i = 0; i < payload.size(); ++i) out += static_cast<char>(payload[i] ^ m[i % 4]);
    return out;
}

}  // namespace gazeprompt

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace gazeprompt {

// Minimal RFC 6455 server side: the upgrade handshake and single frames.

// Sec-WebSocket-Accept value for a client key.
std::string websocket_accept_key(std::string_view client_key);

// Parses a complete HTTP upgrade request (through the blank line) and returns the
// 101 response. Throws Error(protocol) when it is not a WebSocket upgrade.
std::string websocket_handshake_response(std::string_view request);

enum class WsOpcode : std::uint8_t { continuation = 0x0, text = 0x1, binary = 0x2, close = 0x8, ping = 0x9, pong = 0xA };

struct WsFrame {
    bool fin = true;
    WsOpcode opcode = WsOpcode::text;
    bool masked = false;
    std::string payload;  // unmasked
};

// Removes one complete frame from the front of buffer, or returns nullopt when more bytes
// are needed. Throws Error(protocol) on reserved bits or a payload above max_payload.
std::optional<WsFrame> take_websocket_frame(std::string& buffer, std::size_t max_payload);

// Serialized frame; server frames are unmasked, pass a mask to build client frames.
std::string websocket_frame(std::string_view payload, WsOpcode opcode = WsOpcode::text,
                            std::optional<std::uint32_t> mask = std::nullopt);

}  // namespace gazeprompt

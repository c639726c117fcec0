#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>

#include "gazeprompt/session.hpp"

namespace gazeprompt {

struct ServerOptions {
    int port = kDefaultPort;  // 0 picks a free port
    std::string bind_address = "127.0.0.1";
    SessionSettings settings;
    // Session logs are written here as <session>.jsonl when the connection closes.
    std::optional<std::string> log_dir;
    std::size_t max_line_bytes = 1 << 20;
    const std::atomic<bool>* stop = nullptr;
    std::function<void(int port)> on_listening;
};

// Newline-delimited JSON over TCP, one session per connection. Blocks until *stop is
// set. Throws Error(io) when the socket cannot be bound.
void serve(const ServerOptions& options);

}  // namespace gazeprompt

#include "gazeprompt/formats.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "gazeprompt/error.hpp"

namespace gazeprompt {

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error(ErrorCode::io, "cannot format number");
    return std::string(buf, end);
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

// Lines without their terminators; a final empty segment after the last newline is dropped.
std::vector<std::string_view> lines_of(std::string_view text) {
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto& l : lines)
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return lines;
}

double parse_real(std::string_view field, std::size_t line, const char* what) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
    if (!std::isfinite(v))
        throw ParseError(line, std::string(what) + " is not finite: '" + std::string(field) + "'");
    return v;
}

Micros parse_time(std::string_view field, std::size_t line) {
    Micros v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw ParseError(line, "malformed timestamp '" + std::string(field) + "'");
    return v;
}

GazeSample parse_record(std::string_view text, std::size_t line) {
    const auto f = split(text, ',');
    if (f.size() != 5)
        throw ParseError(line, "expected 5 fields, found " + std::to_string(f.size()));
    GazeSample s;
    s.t = parse_time(f[0], line);
    s.x = parse_real(f[1], line, "x");
    s.y = parse_real(f[2], line, "y");
    if (f[3] == "1")
        s.valid = true;
    else if (f[3] == "0")
        s.valid = false;
    else
        throw ParseError(line, "validity must be 0 or 1, found '" + std::string(f[3]) + "'");
    const auto eye = f[4].size() == 1 ? eye_from_code(f[4][0]) : std::nullopt;
    if (!eye) throw ParseError(line, "eye must be L, R or A, found '" + std::string(f[4]) + "'");
    s.eye = *eye;
    return s;
}

std::string emit_record(const GazeSample& s) {
    std::string out = std::to_string(s.t);
    out += ',';
    out += format_number(s.x);
    out += ',';
    out += format_number(s.y);
    out += s.valid ? ",1," : ",0,";
    out += eye_code(s.eye);
    out += '\n';
    return out;
}

// "#<magic> v1 hz=<rate>"
double parse_header(std::string_view header, std::string_view magic) {
    const auto parts = split(header, ' ');
    if (parts.empty() || parts[0] != magic)
        throw ParseError(1, "missing '" + std::string(magic) + "' header");
    if (parts.size() < 2 || parts[1].empty() || parts[1][0] != 'v')
        throw ParseError(1, "missing format version");
    if (parts[1] != "v1")
        throw Error(ErrorCode::unsupported_format,
                    "unsupported " + std::string(magic.substr(1)) + " version '" + std::string(parts[1]) + "'");
    if (parts.size() != 3 || parts[2].substr(0, 3) != "hz=") throw ParseError(1, "missing hz=<rate>");
    const double hz = parse_real(parts[2].substr(3), 1, "sample rate");
    if (!(hz > 0.0)) throw ParseError(1, "sample rate must be positive");
    return hz;
}

}  // namespace

GazeLog parse_gaze_log(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ParseError(1, "missing '#gazelog' header");
    GazeLog log;
    log.sample_rate_hz = parse_header(lines[0], "#gazelog");
    log.samples.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) log.samples.push_back(parse_record(lines[i], i + 1));
    return log;
}

std::string emit_gaze_log(const GazeLog& log) {
    std::string out = "#gazelog v1 hz=" + format_number(log.sample_rate_hz) + "\n";
    for (const auto& s : log.samples) out += emit_record(s);
    return out;
}

SweepLog parse_sweep_log(std::string_view text) {
    const auto lines = lines_of(text);
    if (lines.empty()) throw ParseError(1, "missing '#sweeplog' header");
    SweepLog log;
    log.sample_rate_hz = parse_header(lines[0], "#sweeplog");
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::string_view l = lines[i];
        if (l.substr(0, 8) == "#line y=") {
            SweepRecording rec;
            rec.y_px = parse_real(l.substr(8), i + 1, "line y");
            log.sweeps.push_back(std::move(rec));
            continue;
        }
        if (log.sweeps.empty()) throw ParseError(i + 1, "sample before the first '#line' marker");
        log.sweeps.back().samples.push_back(parse_record(l, i + 1));
    }
    return log;
}

std::string emit_sweep_log(const SweepLog& log) {
    std::string out = "#sweeplog v1 hz=" + format_number(log.sample_rate_hz) + "\n";
    for (const auto& sweep : log.sweeps) {
        out += "#line y=" + format_number(sweep.y_px) + "\n";
        for (const auto& s : sweep.samples) out += emit_record(s);
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::io, "write failed for " + path.string());
}

}  // namespace gazeprompt

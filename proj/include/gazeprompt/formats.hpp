#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gazeprompt/calibration.hpp"
#include "gazeprompt/types.hpp"

namespace gazeprompt {

// Line-oriented gaze log:
//   #gazelog v1 hz=<rate>
//   t_us,x_px,y_px,valid(0|1),eye(L|R|A)
struct GazeLog {
    double sample_rate_hz = 120.0;
    std::vector<GazeSample> samples;
};

// Throws ParseError naming the line, or Error(unsupported_format) on another version.
GazeLog parse_gaze_log(std::string_view text);
std::string emit_gaze_log(const GazeLog& log);

// Sweep log: a gaze log whose records are grouped under `#line y=<px>` markers.
//   #sweeplog v1 hz=<rate>
struct SweepLog {
    double sample_rate_hz = 120.0;
    std::vector<SweepRecording> sweeps;
};

SweepLog parse_sweep_log(std::string_view text);
std::string emit_sweep_log(const SweepLog& log);

// Shortest decimal form that reads back to the same double.
std::string format_number(double v);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace gazeprompt

#pragma once

#include <Eigen/Core>

#include <string>
#include <string_view>
#include <vector>

namespace grk {

// Time-indexed channel matrix. Positions in meters, angles in radians.
struct MotionClip {
    std::vector<std::string> channel_names;
    double frame_rate = 30.0;
    Eigen::MatrixXd values; // frames x channels

    std::size_t frame_count() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t channel_count() const { return channel_names.size(); }
    // Index of the named channel, or -1.
    int find_channel(std::string_view name) const;
};

void validate(const MotionClip& clip);

// Interchange format: a header line `frame_rate <hz> <name> <name> ...`, then
// one whitespace separated row per frame.
std::string write_clip(const MotionClip& clip);
MotionClip parse_clip(std::string_view text);

// Per-channel linear interpolation onto a new frame grid covering the same
// duration.
MotionClip resample_clip(const MotionClip& clip, double target_rate);

} // namespace grk

#pragma once

#include "grk/kinematics.hpp"
#include "grk/motion_clip.hpp"
#include "grk/robot_motion.hpp"

#include <map>
#include <string>
#include <vector>

namespace grk {

struct ChannelReport {
    std::vector<std::string> channels;
    std::vector<double> rmse;
    double mean = 0.0;
    double max = 0.0;
};

ChannelReport rmse_per_channel(const MotionClip& a, const MotionClip& b);

// One `name rmse` row per channel; the mean and max go on `#` comment lines so
// the row set is exactly the channel set.
std::string format_report_txt(const ChannelReport& report);
std::string format_report_csv(const ChannelReport& report);

struct SlidingReport {
    double score = 0.0;              // mean horizontal slide per contact step, meters
    std::size_t contact_steps = 0;   // consecutive contact frame pairs evaluated
    std::size_t sliding_steps = 0;   // of those, steps faster than the velocity threshold
    bool no_contact = false;
};

struct ContactThresholds {
    double height_eps = 0.02;
    double velocity_eps = 0.1;
    double ground_height = 0.0;
};

// A foot is in contact while its height is below ground + height_eps.
SlidingReport foot_sliding_score(const RobotMotion& motion, const KinematicTree& tree,
                                 const std::vector<int>& foot_bodies,
                                 const ContactThresholds& thresholds = {});

// Deepest point below ground over all frames and the given bodies (all bodies
// and the root when `bodies` is empty).
double ground_penetration_score(const RobotMotion& motion, const KinematicTree& tree,
                                double ground_height, const std::vector<int>& bodies = {});

struct SpikeReport {
    std::size_t count = 0;
    std::vector<std::size_t> frames;
};

SpikeReport velocity_spike_count(const RobotMotion& motion, double threshold);

// Number of (frame, body pair) collisions between sphere proxies. Pairs where
// one body is the nearest listed ancestor of the other are skipped.
std::size_t self_intersection_score(const RobotMotion& motion, const KinematicTree& tree,
                                    const std::map<int, double>& sphere_radii);

} // namespace grk

#include "grk/metrics.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace grk {

ChannelReport rmse_per_channel(const MotionClip& a, const MotionClip& b)
{
    validate(a);
    validate(b);
    if (a.channel_names != b.channel_names) fail_data("motions have different channel names");
    if (a.values.rows() != b.values.rows())
        fail_data("motions have different frame counts (" + std::to_string(a.values.rows()) + " vs " +
                  std::to_string(b.values.rows()) + ")");
    if (a.values.rows() == 0) fail_data("cannot compare empty motions");
    ChannelReport r;
    r.channels = a.channel_names;
    const double n = static_cast<double>(a.values.rows());
    for (Eigen::Index c = 0; c < a.values.cols(); ++c) {
        const double v = std::sqrt((a.values.col(c) - b.values.col(c)).squaredNorm() / n);
        r.rmse.push_back(v);
        r.max = std::max(r.max, v);
        r.mean += v;
    }
    if (!r.rmse.empty()) r.mean /= static_cast<double>(r.rmse.size());
    return r;
}

namespace {

std::string fixed6(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

std::string format_report_txt(const ChannelReport& report)
{
    std::size_t width = 7;
    for (const auto& c : report.channels) width = std::max(width, c.size());
    std::string out = "# joint-wise RMSE\n";
    for (std::size_t i = 0; i < report.channels.size(); ++i) {
        std::string name = report.channels[i];
        name.resize(width, ' ');
        out += name + " " + fixed6(report.rmse[i]) + "\n";
    }
    out += "# mean " + fixed6(report.mean) + "\n";
    out += "# max " + fixed6(report.max) + "\n";
    return out;
}

std::string format_report_csv(const ChannelReport& report)
{
    std::string out = "channel,rmse\n";
    for (std::size_t i = 0; i < report.channels.size(); ++i)
        out += report.channels[i] + "," + text::format_double(report.rmse[i]) + "\n";
    return out;
}

SlidingReport foot_sliding_score(const RobotMotion& motion, const KinematicTree& tree, const std::vector<int>& foot_bodies,
                                 const ContactThresholds& th)
{
    for (int b : foot_bodies)
        if (b < 0 || static_cast<std::size_t>(b) >= tree.body_count()) fail_usage("foot body index out of range");
    const auto fk = motion_fk(tree, motion);
    SlidingReport r;
    double total = 0.0;
    const double dt = 1.0 / motion.frame_rate;
    for (std::size_t t = 1; t < fk.size(); ++t) {
        for (int b : foot_bodies) {
            const Eigen::Vector3d p0 = fk[t - 1].position(b), p1 = fk[t].position(b);
            const double limit = th.ground_height + th.height_eps;
            if (p0.z() >= limit || p1.z() >= limit) continue;
            const double d = (p1 - p0).head<2>().norm();
            total += d;
            ++r.contact_steps;
            if (d / dt > th.velocity_eps) ++r.sliding_steps;
        }
    }
    r.no_contact = r.contact_steps == 0;
    r.score = r.no_contact ? 0.0 : total / static_cast<double>(r.contact_steps);
    return r;
}

double ground_penetration_score(const RobotMotion& motion, const KinematicTree& tree, double ground_height,
                                const std::vector<int>& bodies)
{
    double worst = 0.0;
    for (const auto& fk : motion_fk(tree, motion)) {
        if (bodies.empty()) {
            worst = std::max(worst, ground_height - fk.root_position.z());
            for (const auto& p : fk.positions) worst = std::max(worst, ground_height - p.z());
        } else {
            for (int b : bodies) worst = std::max(worst, ground_height - fk.position(b).z());
        }
    }
    return worst;
}

SpikeReport velocity_spike_count(const RobotMotion& motion, double threshold)
{
    validate(motion);
    SpikeReport r;
    const auto& q = motion.joint_angles;
    for (Eigen::Index t = 1; t < q.rows(); ++t) {
        const double speed = (q.row(t) - q.row(t - 1)).cwiseAbs().maxCoeff() * motion.frame_rate;
        if (speed > threshold) {
            ++r.count;
            r.frames.push_back(static_cast<std::size_t>(t));
        }
    }
    return r;
}

std::size_t self_intersection_score(const RobotMotion& motion, const KinematicTree& tree,
                                    const std::map<int, double>& sphere_radii)
{
    std::vector<int> bodies;
    for (const auto& [b, r] : sphere_radii) {
        if (b < 0 || static_cast<std::size_t>(b) >= tree.body_count()) fail_usage("sphere body index out of range");
        if (!(r > 0.0)) fail_usage("sphere radii must be positive");
        bodies.push_back(b);
    }
    // Nearest listed ancestor of each listed body; such pairs are adjacent.
    std::map<int, int> listed_parent;
    for (int b : bodies) {
        int p = tree.parent_of(b);
        while (p != kRootBody && !sphere_radii.count(p)) p = tree.parent_of(p);
        listed_parent[b] = p;
    }
    std::size_t hits = 0;
    for (const auto& fk : motion_fk(tree, motion)) {
        for (std::size_t i = 0; i < bodies.size(); ++i)
            for (std::size_t j = i + 1; j < bodies.size(); ++j) {
                const int a = bodies[i], b = bodies[j];
                if (listed_parent[a] == b || listed_parent[b] == a) continue;
                const double reach = sphere_radii.at(a) + sphere_radii.at(b);
                if ((fk.position(a) - fk.position(b)).norm() < reach) ++hits;
            }
    }
    return hits;
}

} // namespace grk

#include <doctest.h>

#include "fixtures.hpp"

#include "grk/error.hpp"
#include "grk/metrics.hpp"
#include "grk/text.hpp"

#include <cmath>

using namespace grk;

namespace {

const KinematicTree& g1()
{
    static const KinematicTree t = load_robot_description(fixtures::data_path("g1_29dof.desc"));
    return t;
}

RobotMotion standing(std::size_t frames)
{
    RobotMotion m = make_motion(g1(), 30.0, frames);
    for (auto& p : m.root_position) p = g1().root_rest_position();
    return m;
}

} // namespace

TEST_CASE("metrics: rmse per channel against a direct computation")
{
    MotionClip a, b;
    a.channel_names = b.channel_names = {"x", "y"};
    a.values.resize(4, 2);
    b.values.resize(4, 2);
    a.values << 0, 1, 1, 1, 2, 1, 3, 1;
    b.values << 0, 1, 1, 2, 2, 1, 5, 1;
    const ChannelReport r = rmse_per_channel(a, b);
    CHECK(r.rmse[0] == doctest::Approx(std::sqrt(4.0 / 4.0)));
    CHECK(r.rmse[1] == doctest::Approx(std::sqrt(1.0 / 4.0)));
    CHECK(r.mean == doctest::Approx(0.75));
    CHECK(r.max == doctest::Approx(1.0));
    b.channel_names = {"x", "z"};
    CHECK_THROWS_AS(rmse_per_channel(a, b), Error);
}

TEST_CASE("metrics: report rows are exactly the channels")
{
    const RobotMotion m = standing(3);
    const ChannelReport r = rmse_per_channel(to_clip(m), to_clip(m));
    const std::string txt = format_report_txt(r);
    std::size_t rows = 0;
    for (auto line : text::split(txt, '\n')) {
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        CHECK(text::split_ws(line).front() == r.channels[rows]);
        ++rows;
    }
    CHECK(rows == 35);
    const std::string csv = format_report_csv(r);
    CHECK(csv.rfind("channel,rmse\n", 0) == 0);
    CHECK(text::split(text::trim(csv), '\n').size() == 36);
}

TEST_CASE("metrics: standing still has no sliding, penetration or spikes")
{
    const RobotMotion m = standing(10);
    const std::vector<int> feet = {*g1().find_body("left_sole"), *g1().find_body("right_sole")};
    const SlidingReport s = foot_sliding_score(m, g1(), feet);
    CHECK(s.score == 0.0);
    CHECK(s.contact_steps == 18);
    CHECK(ground_penetration_score(m, g1(), 0.0) <= 1e-12);
    CHECK(velocity_spike_count(m, 20.0).count == 0);
}

TEST_CASE("metrics: a gliding root slides the planted feet by its displacement")
{
    RobotMotion m = standing(11);
    for (std::size_t f = 0; f < 11; ++f) m.root_position[f].x() += 0.01 * static_cast<double>(f);
    const std::vector<int> feet = {*g1().find_body("left_sole")};
    CHECK(foot_sliding_score(m, g1(), feet).score == doctest::Approx(0.01));
    // Lifted feet are not in contact.
    for (auto& p : m.root_position) p.z() += 0.5;
    CHECK(foot_sliding_score(m, g1(), feet).no_contact);
}

TEST_CASE("metrics: sinking root is reported as penetration depth")
{
    RobotMotion m = standing(2);
    m.root_position[1].z() -= 0.05;
    CHECK(ground_penetration_score(m, g1(), 0.0) == doctest::Approx(0.05));
    CHECK(ground_penetration_score(m, g1(), 0.0, {*g1().find_body("head")}) == 0.0);
}

TEST_CASE("metrics: velocity spikes flag the arriving frame")
{
    RobotMotion m = standing(5);
    m.joint_angles(3, 4) = 1.0; // 30 rad/s in and out
    const SpikeReport r = velocity_spike_count(m, 20.0);
    CHECK(r.count == 2);
    CHECK(r.frames == std::vector<std::size_t>{3, 4});
    CHECK(velocity_spike_count(m, 31.0).count == 0);
}

TEST_CASE("metrics: self intersection with sphere proxies")
{
    const RobotMotion m = standing(1);
    const int lw = *g1().find_body("left_wrist_yaw_joint"), rw = *g1().find_body("right_wrist_yaw_joint");
    const auto fk = forward_kinematics(g1(), m.pose(0));
    const double gap = (fk.position(lw) - fk.position(rw)).norm();
    CHECK(self_intersection_score(m, g1(), {{lw, gap / 2 - 0.01}, {rw, gap / 2 - 0.01}}) == 0);
    CHECK(self_intersection_score(m, g1(), {{lw, gap / 2 + 0.01}, {rw, gap / 2 + 0.01}}) == 1);
    // Parent/child pairs never count.
    const int le = *g1().find_body("left_elbow_joint");
    CHECK(self_intersection_score(m, g1(), {{le, 1.0}, {lw, 1.0}}) == 0);
}

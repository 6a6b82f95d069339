#include <doctest.h>

#include "fixtures.hpp"

#include "grk/error.hpp"
#include "grk/metrics.hpp"
#include "grk/retarget.hpp"
#include "grk/text.hpp"

#include <cmath>
#include <numbers>

using namespace grk;

namespace {

const KinematicTree& g1()
{
    static const KinematicTree t = load_robot_description(fixtures::data_path("g1_29dof.desc"));
    return t;
}

// The G1 yawed by `yaw` and shifted, as a stand-in human. Rest frames are
// world aligned, so every offset and axis rotates.
KinematicTree rotated_copy(double yaw, const Eigen::Vector3d& shift)
{
    const Eigen::Matrix3d r = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
    std::vector<JointSpec> joints = g1().joints();
    for (auto& j : joints) {
        j.offset_in_parent = r * j.offset_in_parent;
        j.axis = r * j.axis;
    }
    return KinematicTree(g1().root_name(), r * g1().root_rest_position() + shift, true, joints);
}

} // namespace

TEST_CASE("retarget: correspondence text round trip and validation")
{
    const Correspondence c = fixtures::human_to_g1();
    const Correspondence back = parse_correspondence(write_correspondence(c));
    REQUIRE(back.pairs.size() == c.pairs.size());
    CHECK(back.pairs[5].human_body == "LeftFoot");
    CHECK(back.pairs[5].end_effector);
    CHECK(back.pairs[3].weight_orientation == 0.0);

    const BvhSkeleton human = skeleton_from_bvh(fixtures::human_skeleton());
    CHECK_NOTHROW(validate(c, human.tree, g1()));
    Correspondence bad = c;
    bad.pairs[0].robot_body = "no_such_body";
    CHECK_THROWS_AS(validate(bad, human.tree, g1()), Error);
    bad = c;
    bad.pairs[0].weight_position = -1.0;
    CHECK_THROWS_AS(validate(bad, human.tree, g1()), Error);
    bad = c;
    for (auto& p : bad.pairs) p.end_effector = false;
    CHECK_THROWS_AS(validate(bad, human.tree, g1()), Error);
    CHECK_THROWS_AS(parse_correspondence("Hips pelvis 1 1\n"), Error);
}

TEST_CASE("retarget: config keys")
{
    const RetargetConfig c = retarget_config_from(KeyValueConfig::parse(
        "scale.LeftLeg = 0.9\nroot_translation_scale = 0.8\ndamping_lambda = 0.1\nablation_root_axis_scale = 1 2 3\n"));
    CHECK(c.local_scale_per_bone.at("LeftLeg") == 0.9);
    CHECK(*c.root_translation_scale == 0.8);
    CHECK(c.damping_lambda == 0.1);
    CHECK(*c.ablation_root_axis_scale == Eigen::Vector3d(1, 2, 3));
    CHECK_FALSE(retarget_config_from(KeyValueConfig::parse("root_translation_scale = auto\n")).root_translation_scale);
    CHECK_THROWS_AS(validate(retarget_config_from(KeyValueConfig::parse("damping_lambda = -1\n"))), Error);
}

TEST_CASE("retarget: rest alignment recovers a known yaw and shift")
{
    const double yaw = 0.6;
    const Eigen::Vector3d shift(0.3, -0.2, 0.0);
    const KinematicTree human = rotated_copy(yaw, shift);
    Correspondence c;
    for (const char* b : {"pelvis", "left_knee_joint", "right_knee_joint", "left_ankle_roll_joint",
                          "right_ankle_roll_joint", "left_wrist_yaw_joint", "right_wrist_yaw_joint", "head"})
        c.pairs.push_back({b, b, 1.0, 1.0, std::string(b).find("ankle") != std::string::npos});
    const RestAlignment a = align_rest_pose(human, g1(), c);
    CHECK(a.robot_to_human.rotation.angularDistance(Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()))) < 1e-9);
    CHECK((a.robot_to_human.translation - shift).norm() < 1e-9);
    for (const auto& o : a.position_offsets) CHECK(o.norm() < 1e-9);
}

TEST_CASE("retarget: rest alignment rejects collinear points")
{
    Correspondence c;
    c.pairs.push_back({"pelvis", "pelvis", 1, 1, false});
    c.pairs.push_back({"waist_yaw_joint", "waist_yaw_joint", 1, 1, true});
    CHECK_THROWS_AS(align_rest_pose(g1(), g1(), c), Error);
}

TEST_CASE("retarget: default scales are rest bone length ratios")
{
    const BvhSkeleton human = skeleton_from_bvh(fixtures::human_skeleton());
    const Correspondence c = fixtures::human_to_g1();
    const ScaleFactors s = resolve_scales(human.tree, g1(), c, RetargetConfig{});
    // Knee pair hangs off the pelvis pair.
    CHECK(s.parent_pair[3] == 0);
    const auto rh = forward_kinematics(human.tree, rest_pose(human.tree));
    const auto rr = forward_kinematics(g1(), rest_pose(g1()));
    const double human_len = (rh.position(*human.tree.find_body("LeftLeg")) - rh.position(*human.tree.find_body("Hips"))).norm();
    const double robot_len = (rr.position(*g1().find_body("left_knee_joint")) - rr.root_position).norm();
    CHECK(s.bone_scale[3] == doctest::Approx(robot_len / human_len));

    RetargetConfig fixed;
    fixed.local_scale_per_bone["LeftLeg"] = 0.5;
    fixed.root_translation_scale = 0.7;
    const ScaleFactors f = resolve_scales(human.tree, g1(), c, fixed);
    CHECK(f.bone_scale[3] == 0.5);
    CHECK(f.root_translation_scale == 0.7);
}

TEST_CASE("retarget: unit scales leave the source trajectories unchanged")
{
    const BvhDocument doc = fixtures::walking_clip(10);
    const BvhSkeleton skel = skeleton_from_bvh(doc);
    const Correspondence c = fixtures::self_correspondence(doc);
    RetargetConfig cfg;
    for (const auto& p : c.pairs) cfg.local_scale_per_bone[p.human_body] = 1.0;
    cfg.root_translation_scale = 1.0;
    std::vector<Pose> poses;
    for (std::size_t f = 0; f < doc.frame_count(); ++f) poses.push_back(bvh_frame_pose(skel, doc, f));
    const ScaleFactors s = resolve_scales(skel.tree, skel.tree, c, cfg);
    const KeyTrajectories k = scale_source_motion(skel.tree, poses, c, s, cfg);
    for (std::size_t f = 0; f < poses.size(); ++f) {
        const auto fk = forward_kinematics(skel.tree, poses[f]);
        for (std::size_t i = 0; i < c.pairs.size(); ++i)
            CHECK((k.positions[i][f] - fk.position(*skel.tree.find_body(c.pairs[i].human_body))).norm() < 1e-12);
    }
}

TEST_CASE("retarget: ground projection lifts the root to the lowest body")
{
    Pose p = rest_pose(g1());
    p.root_position.z() -= 0.1;
    const Pose lifted = project_to_ground(g1(), p, 0.0);
    const auto fk = forward_kinematics(g1(), lifted);
    double lowest = fk.root_position.z();
    for (const auto& x : fk.positions) lowest = std::min(lowest, x.z());
    CHECK(std::abs(lowest) < 1e-12);
    // Above ground nothing moves.
    Pose high = rest_pose(g1());
    high.root_position.z() += 0.2;
    CHECK(project_to_ground(g1(), high, 0.0).root_position == high.root_position);
}

TEST_CASE("retarget: root velocities by central differences")
{
    RobotMotion m = make_motion(g1(), 10.0, 5);
    for (std::size_t f = 0; f < 5; ++f) {
        const double t = static_cast<double>(f) / 10.0;
        m.root_position[f] = Eigen::Vector3d(2.0 * t, 0.0, t * t);
        m.root_orientation[f] = quat_exp(Eigen::Vector3d(0, 0, 0.5 * t));
    }
    m = compute_root_velocities(std::move(m));
    CHECK((m.root_linear_velocity[2] - Eigen::Vector3d(2.0, 0.0, 0.4)).norm() < 1e-12);
    CHECK((m.root_linear_velocity[0] - Eigen::Vector3d(2.0, 0.0, 0.1)).norm() < 1e-12);
    CHECK((m.root_angular_velocity[2] - Eigen::Vector3d(0, 0, 0.5)).norm() < 1e-9);
}

TEST_CASE("retarget: walking clip onto the G1")
{
    const KinematicTree& robot = g1();
    const Correspondence c = fixtures::human_to_g1();
    RetargetDiagnostics diag;
    const RobotMotion m = retarget_clip(fixtures::walking_clip(60), robot, c, RetargetConfig{}, &diag);
    CHECK(m.frame_count() == 60);
    CHECK(m.frame_rate == doctest::Approx(30.0));
    CHECK(m.joint_names == robot.dof_names());
    for (std::size_t f = 0; f < 60; ++f) CHECK(diag.stage2_objective[f] <= diag.stage1_objective[f]);
    const Eigen::VectorXd lo = robot.lower_limits(), hi = robot.upper_limits();
    for (Eigen::Index f = 0; f < m.joint_angles.rows(); ++f) {
        CHECK((m.joint_angles.row(f).transpose() - lo).minCoeff() >= 0.0);
        CHECK((hi - m.joint_angles.row(f).transpose()).minCoeff() >= 0.0);
    }
    CHECK(ground_penetration_score(m, robot, 0.0) <= 1e-9);
    // Forward progress of the pelvis, after the yaw alignment, is about 0.64 m/s scaled down.
    const double travelled = (m.root_position.back() - m.root_position.front()).head<2>().norm();
    CHECK(travelled > 0.8);
    CHECK(travelled < 1.3);
}

TEST_CASE("retarget: mismatched bodies fail with a data error")
{
    Correspondence c = fixtures::human_to_g1();
    c.pairs[1].human_body = "Nope";
    CHECK_THROWS_AS(retarget_clip(fixtures::walking_clip(3), g1(), c, RetargetConfig{}), Error);
}

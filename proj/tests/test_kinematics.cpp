#include <doctest.h>

#include "fixtures.hpp"

#include "grk/error.hpp"
#include "grk/kinematics.hpp"
#include "grk/kmeans.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace grk;

namespace {

// Planar two-link arm rotating about z.
KinematicTree two_link()
{
    JointSpec a;
    a.name = "shoulder";
    a.offset_in_parent = Eigen::Vector3d(0, 0, 1);
    a.axis = Eigen::Vector3d::UnitZ();
    a.limit_lower = -3;
    a.limit_upper = 3;
    JointSpec b = a;
    b.name = "elbow";
    b.parent = 0;
    b.offset_in_parent = Eigen::Vector3d(1, 0, 0);
    JointSpec tip;
    tip.name = "tip";
    tip.parent = 1;
    tip.offset_in_parent = Eigen::Vector3d(0.5, 0, 0);
    tip.axis = Eigen::Vector3d::Zero();
    tip.is_key_body = true;
    return KinematicTree("base", Eigen::Vector3d::Zero(), true, {a, b, tip});
}

} // namespace

TEST_CASE("kinematics: two-link forward kinematics matches the closed form")
{
    const KinematicTree t = two_link();
    CHECK(t.dof_count() == 2);
    CHECK(t.body_count() == 3);
    Pose p = rest_pose(t);
    p.joint_angles << 0.3, -0.7;
    const auto fk = forward_kinematics(t, p);
    const Eigen::Vector3d expected(std::cos(0.3) + 0.5 * std::cos(-0.4), std::sin(0.3) + 0.5 * std::sin(-0.4), 1.0);
    CHECK((fk.position(2) - expected).norm() < 1e-12);
    CHECK(std::abs(fk.orientation(2).angularDistance(Eigen::Quaterniond(Eigen::AngleAxisd(-0.4, Eigen::Vector3d::UnitZ())))) < 1e-12);
}

TEST_CASE("kinematics: G1 description loads with 29 joints in table order")
{
    const KinematicTree g1 = load_robot_description(fixtures::data_path("g1_29dof.desc"));
    const auto names = g1.dof_names();
    REQUIRE(names.size() == 29);
    CHECK(names.front() == "left_hip_pitch_joint");
    CHECK(names[12] == "waist_yaw_joint");
    CHECK(names.back() == "right_wrist_yaw_joint");
    // Rest soles touch the ground.
    const auto fk = forward_kinematics(g1, rest_pose(g1));
    CHECK(std::abs(fk.position(*g1.find_body("left_sole")).z()) < 1e-9);
    // Writing and re-reading preserves the tree.
    const KinematicTree again = parse_robot_description(write_robot_description(g1));
    CHECK(again.dof_names() == names);
}

TEST_CASE("kinematics: description errors")
{
    CHECK_THROWS_AS(parse_robot_description("a - 0 0 0 0 0 1 0 0 0\nb c 0 0 0 0 0 1 -1 1 0\n"), Error);
    CHECK_THROWS_AS(parse_robot_description("a - 0 0 0 0 0 1 0 0 0\nb a 0 0 0 0 0 1 1 -1 0\n"), Error);
    CHECK_THROWS_AS(parse_robot_description("a - 0 0 0 0 0 1 0 0 0\nb a 0 0 0 0 0 1 -1 1\n"), Error);
}

TEST_CASE("kinematics: quaternion log/exp round trip")
{
    std::mt19937_64 rng(1);
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d v(uniform01(rng) - 0.5, uniform01(rng) - 0.5, uniform01(rng) - 0.5);
        v *= 6.0 * uniform01(rng);
        if (v.norm() >= std::numbers::pi) continue;
        CHECK((quat_log(quat_exp(v)) - v).norm() < 1e-10);
    }
    CHECK(quat_log(Eigen::Quaterniond::Identity()).norm() == 0.0);
}

TEST_CASE("kinematics: jacobian matches finite differences on the two-link arm")
{
    const KinematicTree t = two_link();
    Pose p = rest_pose(t);
    p.joint_angles << 0.4, 1.1;
    p.root_orientation = quat_exp(Eigen::Vector3d(0.1, -0.2, 0.3));
    const Jacobian j = jacobian(t, p, 2);
    const double h = 1e-6;
    for (Eigen::Index k = 0; k < j.cols(); ++k) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(j.cols());
        d[k] = h;
        const auto a = forward_kinematics(t, integrate(p, d)), b = forward_kinematics(t, integrate(p, -d));
        const Eigen::Vector3d lin = (a.position(2) - b.position(2)) / (2 * h);
        const Eigen::Vector3d ang = quat_log(a.orientation(2) * b.orientation(2).conjugate()) / (2 * h);
        CHECK((j.block<3, 1>(0, k) - lin).norm() < 1e-7);
        CHECK((j.block<3, 1>(3, k) - ang).norm() < 1e-7);
    }
}

TEST_CASE("kinematics: clamping respects limits")
{
    const KinematicTree t = two_link();
    Pose p = rest_pose(t);
    p.joint_angles << 5.0, -5.0;
    const Pose c = clamp_to_limits(t, p);
    CHECK(c.joint_angles[0] == 3.0);
    CHECK(c.joint_angles[1] == -3.0);
}

TEST_CASE("kinematics: BVH skeleton follows the y-up to z-up change of basis")
{
    const BvhDocument doc = fixtures::walking_clip(5);
    const BvhSkeleton skel = skeleton_from_bvh(doc);
    // Three revolute joints per rotated BVH joint plus fixed end sites.
    CHECK(skel.tree.dof_count() == 3 * 20);
    const Pose rest = [&] {
        Pose p = rest_pose(skel.tree);
        p.root_position = Eigen::Vector3d::Zero();
        return p;
    }();
    const auto fk = forward_kinematics(skel.tree, rest);
    // LeftUpLeg sits 9 cm along BVH +x (world +x) and 5 cm down.
    const Eigen::Vector3d hip = fk.position(*skel.tree.find_body("LeftUpLeg"));
    CHECK((hip - Eigen::Vector3d(0.09, 0.0, -0.05)).norm() < 1e-12);
    // The toe's end site points forward, BVH +z, which is world -y.
    const Eigen::Vector3d toe = fk.position(*skel.tree.find_body("LeftToe"));
    const Eigen::Vector3d tip = fk.position(*skel.tree.find_body("LeftToe_End"));
    CHECK((tip - toe - Eigen::Vector3d(0, -0.05, 0)).norm() < 1e-12);

    const Pose f0 = bvh_frame_pose(skel, doc, 0);
    CHECK(f0.root_position.z() == doctest::Approx(0.895));
}

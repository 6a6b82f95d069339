#pragma once

#include "grk/kinematics.hpp"
#include "grk/motion_clip.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>
#include <string_view>
#include <vector>

namespace grk {

// Reference motion for a robot: floating-base state plus joint angles.
struct RobotMotion {
    double frame_rate = 30.0;
    std::vector<std::string> joint_names;
    std::vector<Eigen::Vector3d> root_position;
    std::vector<Eigen::Quaterniond> root_orientation;
    std::vector<Eigen::Vector3d> root_linear_velocity;
    std::vector<Eigen::Vector3d> root_angular_velocity;
    Eigen::MatrixXd joint_angles; // frames x joints

    std::size_t frame_count() const { return root_position.size(); }
    // Allocates `frames` frames at identity/zero.
    void resize(std::size_t frames);
    Pose pose(std::size_t frame) const;
    void set_pose(std::size_t frame, const Pose& pose);
};

RobotMotion make_motion(const KinematicTree& tree, double frame_rate, std::size_t frames);
void validate(const RobotMotion& motion);

// Column names: root_pos_{x,y,z}, root_vel_{x,y,z}, then the joint names. The
// extended layout appends root_quat_{w,x,y,z} and root_angvel_{x,y,z}.
std::vector<std::string> motion_channel_names(const std::vector<std::string>& joint_names,
                                              bool extended);

MotionClip to_clip(const RobotMotion& motion, bool extended = false);
// Missing orientation columns read as identity, missing angular velocity as zero.
RobotMotion from_clip(const MotionClip& clip);

// File layout: `frame_rate <hz>` line, channel-name line, one row per frame.
std::string write_robot_motion(const RobotMotion& motion, bool extended = false);
RobotMotion parse_robot_motion(std::string_view text);
RobotMotion load_robot_motion(const std::string& path);

// Per-frame forward kinematics of the whole motion.
std::vector<BodyTransforms> motion_fk(const KinematicTree& tree, const RobotMotion& motion);

} // namespace grk

#pragma once

#include "grk/kinematics.hpp"
#include "grk/robot_motion.hpp"

#include <Eigen/Core>

#include <string>
#include <string_view>

namespace grk {

// Per-joint bound on the residual offset, radians.
struct ActionScale {
    Eigen::VectorXd scale;
};

// Defaults: 0.3 rad for leg and waist joints, 0.6 rad for arm and wrist joints.
ActionScale default_action_scale(const KinematicTree& tree);
// Lines `joint_name scale_radians`; joints not listed keep their default.
ActionScale parse_action_scale(std::string_view text, const KinematicTree& tree);
void validate(const ActionScale& scale, const KinematicTree& tree);

// target = clamp(reference + scale * tanh(action)) per joint.
Eigen::VectorXd residual_to_pd_target(const Eigen::VectorXd& reference, const Eigen::VectorXd& action,
                                      const ActionScale& scale, const KinematicTree& tree);

// Root channels pass through unchanged.
RobotMotion apply_to_motion(const RobotMotion& motion, const Eigen::MatrixXd& actions,
                            const ActionScale& scale, const KinematicTree& tree);

// Whitespace-separated rows, one per frame; `#` lines ignored.
Eigen::MatrixXd parse_matrix(std::string_view text);

} // namespace grk

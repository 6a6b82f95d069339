#pragma once

// Human-to-robot motion retargeting: rest-pose alignment, local bone scaling
// with a uniform root translation scale, and a two-stage damped least squares
// differential IK.

#include "grk/bvh.hpp"
#include "grk/config.hpp"
#include "grk/kinematics.hpp"
#include "grk/robot_motion.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace grk {

struct CorrespondencePair {
    std::string human_body;
    std::string robot_body;
    double weight_position = 1.0;
    double weight_orientation = 1.0;
    bool end_effector = false;
};

struct Correspondence {
    std::vector<CorrespondencePair> pairs;
};

// Lines: `human_body robot_body w_pos w_ori ee_flag`; `#` starts a comment.
Correspondence parse_correspondence(std::string_view text);
std::string write_correspondence(const Correspondence& corr);
void validate(const Correspondence& corr, const KinematicTree& human, const KinematicTree& robot);

struct RetargetConfig {
    // Keyed by the human body that ends the bone. Missing bones use the
    // rest-pose length ratio.
    std::map<std::string, double> local_scale_per_bone;
    std::optional<double> root_translation_scale; // unset: leg length ratio
    double damping_lambda = 0.05;
    int max_iterations_stage1 = 50;
    int max_iterations_stage2 = 100;
    double convergence_tol = 1e-4;
    double ground_height = 0.0;
    // Ablation only: replaces the uniform root scale by a per-axis scale.
    std::optional<Eigen::Vector3d> ablation_root_axis_scale;
};

RetargetConfig retarget_config_from(const KeyValueConfig& cfg);
void validate(const RetargetConfig& config);

// A rigid transform x -> rotation * x + translation.
struct RigidTransform {
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
    RigidTransform inverse() const;
};

// Target pose for one robot key body.
struct BodyTarget {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();
};

struct RestAlignment {
    // Maps robot rest coordinates onto the human rest coordinates.
    RigidTransform robot_to_human;
    // Per correspondence pair, expressed in the human body frame.
    std::vector<Eigen::Vector3d> position_offsets;
    std::vector<Eigen::Quaterniond> orientation_offsets;

    // Robot-frame target for pair `i` given the human body world pose.
    BodyTarget target(std::size_t i, const Eigen::Vector3d& human_position,
                      const Eigen::Quaterniond& human_orientation) const;
};

// Yaw + translation (z from the lowest key bodies) minimizing the squared
// distance between corresponding rest key bodies, plus residual offsets.
RestAlignment align_rest_pose(const KinematicTree& human, const KinematicTree& robot,
                              const Correspondence& corr);
// Same, with the human rest positions/orientations supplied explicitly (used
// after scaling).
RestAlignment align_rest_pose(const std::vector<BodyTarget>& human_rest, const KinematicTree& robot,
                              const Correspondence& corr);

// Per pair, per frame key-body trajectories.
struct KeyTrajectories {
    std::vector<std::vector<Eigen::Vector3d>> positions;
    std::vector<std::vector<Eigen::Quaterniond>> orientations;
};

struct ScaleFactors {
    std::vector<double> bone_scale; // per pair
    std::vector<int> parent_pair;   // -1: scaled relative to the human root
    double root_translation_scale = 1.0;
};

// Resolves configured and default per-bone scales (robot/human rest length).
ScaleFactors resolve_scales(const KinematicTree& human, const KinematicTree& robot,
                            const Correspondence& corr, const RetargetConfig& config);

KeyTrajectories scale_source_motion(const KinematicTree& human, const std::vector<Pose>& human_poses,
                                    const Correspondence& corr, const ScaleFactors& scales,
                                    const RetargetConfig& config);

using FrameTargets = std::vector<BodyTarget>; // one per correspondence pair

// Solver problem for one robot; robot body indices are resolved once.
class IkProblem {
public:
    IkProblem(const KinematicTree& robot, const Correspondence& corr);

    // Weighted squared residual of the stage-1 (orientations + end effector
    // positions) or stage-2 (adds every key-body position) objective.
    double objective(const Pose& pose, const FrameTargets& targets, int stage) const;

    const KinematicTree& robot() const { return *robot_; }
    const Correspondence& correspondence() const { return *corr_; }
    const std::vector<int>& robot_bodies() const { return bodies_; }

    Pose solve(const FrameTargets& targets, const Pose& init, const RetargetConfig& config,
               int stage) const;

private:
    void residual(const Pose& pose, const BodyTransforms& fk, const FrameTargets& targets,
                  int stage, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const;

    const KinematicTree* robot_;
    const Correspondence* corr_;
    std::vector<int> bodies_;
    double weight_norm_ = 1.0;
};

Pose stage1_solve(const IkProblem& problem, const FrameTargets& targets, const Pose& warm_start,
                  const RetargetConfig& config);
Pose stage2_solve(const IkProblem& problem, const FrameTargets& targets, const Pose& init,
                  const RetargetConfig& config);

struct RetargetDiagnostics {
    std::vector<double> stage1_objective; // stage-2 objective at the stage-1 output
    std::vector<double> stage2_objective; // stage-2 objective at the stage-2 output
};

RobotMotion retarget_poses(const std::vector<Pose>& human_poses, double frame_rate,
                           const KinematicTree& human, const KinematicTree& robot,
                           const Correspondence& corr, const RetargetConfig& config,
                           RetargetDiagnostics* diagnostics = nullptr);

RobotMotion retarget_clip(const BvhDocument& clip, const KinematicTree& robot,
                          const Correspondence& corr, const RetargetConfig& config,
                          RetargetDiagnostics* diagnostics = nullptr);

// Lifts the root until no body (nor the root) is below the ground plane.
Pose project_to_ground(const KinematicTree& robot, Pose pose, double ground_height);
RobotMotion project_to_ground(const KinematicTree& robot, RobotMotion motion, double ground_height);

// Central differences (one-sided at the ends) for the root linear velocity and
// the rotation-vector rate of the root orientation.
RobotMotion compute_root_velocities(RobotMotion motion);

} // namespace grk

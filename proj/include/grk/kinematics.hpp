#pragma once

// Kinematic trees with a floating base, revolute joints and fixed frames.
//
// Conventions: quaternions are w-first Hamilton quaternions describing active
// rotations; z is up in world coordinates. Body index kRootBody addresses the
// floating base, indices 0..joints.size()-1 address the joint bodies.

#include "grk/bvh.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grk {

inline constexpr int kRootBody = -1;

struct JointSpec {
    std::string name;
    int parent = kRootBody;
    Eigen::Vector3d offset_in_parent = Eigen::Vector3d::Zero();
    // Unit revolute axis in the parent frame, or zero for a fixed frame.
    Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
    double limit_lower = 0.0;
    double limit_upper = 0.0;
    bool is_key_body = false;

    bool is_fixed() const { return axis.isZero(0.0); }
};

class KinematicTree {
public:
    KinematicTree() = default;
    // Validates and indexes the joints. Throws a data error on violations.
    KinematicTree(std::string root_name, Eigen::Vector3d root_rest_position, bool root_is_key,
                  std::vector<JointSpec> joints);

    const std::string& root_name() const { return root_name_; }
    const Eigen::Vector3d& root_rest_position() const { return root_rest_position_; }
    bool root_is_key_body() const { return root_is_key_; }
    const std::vector<JointSpec>& joints() const { return joints_; }
    const JointSpec& joint(std::size_t i) const { return joints_[i]; }

    std::size_t body_count() const { return joints_.size(); }
    std::size_t dof_count() const { return joint_of_dof_.size(); }
    // -1 for fixed frames.
    int dof_of_joint(std::size_t joint) const { return dof_of_joint_[joint]; }
    std::size_t joint_of_dof(std::size_t dof) const { return joint_of_dof_[dof]; }
    std::vector<std::string> dof_names() const;

    std::optional<int> find_body(std::string_view name) const;
    std::string body_name(int body) const;
    int parent_of(int body) const { return body == kRootBody ? kRootBody : joints_[body].parent; }
    // True when `ancestor` lies on the chain from the root to `body` (inclusive).
    bool is_ancestor(int ancestor, int body) const;
    std::vector<int> key_bodies() const;

    Eigen::VectorXd lower_limits() const;
    Eigen::VectorXd upper_limits() const;

private:
    std::string root_name_ = "root";
    Eigen::Vector3d root_rest_position_ = Eigen::Vector3d::Zero();
    bool root_is_key_ = false;
    std::vector<JointSpec> joints_;
    std::vector<int> dof_of_joint_;
    std::vector<std::size_t> joint_of_dof_;
};

// Robot description table: one joint per line,
//   name parent ox oy oz ax ay az lower upper key_body_flag
// The floating base is the single line whose parent is `-`; its offset is the
// rest root position. A zero axis declares a fixed frame.
KinematicTree parse_robot_description(std::string_view text);
KinematicTree load_robot_description(const std::string& path);
std::string write_robot_description(const KinematicTree& tree);

struct Pose {
    Eigen::Vector3d root_position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond root_orientation = Eigen::Quaterniond::Identity();
    Eigen::VectorXd joint_angles; // one entry per degree of freedom
};

struct BodyTransforms {
    Eigen::Vector3d root_position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond root_orientation = Eigen::Quaterniond::Identity();
    std::vector<Eigen::Vector3d> positions;
    std::vector<Eigen::Quaterniond> orientations;

    const Eigen::Vector3d& position(int body) const
    {
        return body == kRootBody ? root_position : positions[static_cast<std::size_t>(body)];
    }
    const Eigen::Quaterniond& orientation(int body) const
    {
        return body == kRootBody ? root_orientation : orientations[static_cast<std::size_t>(body)];
    }
};

// Root at its rest position, all joint angles zero (clamped into limits).
Pose rest_pose(const KinematicTree& tree);

BodyTransforms forward_kinematics(const KinematicTree& tree, const Pose& pose);

using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

// Rows: world linear velocity then world angular velocity of `body`.
// Columns: root linear velocity (3), root angular velocity (3, world frame),
// then one column per degree of freedom.
Jacobian jacobian(const KinematicTree& tree, const Pose& pose, int body);
Jacobian jacobian(const KinematicTree& tree, const BodyTransforms& fk, int body);

Pose clamp_to_limits(const KinematicTree& tree, const Pose& pose);

// Applies a generalized increment (root linear, root angular, joint rates) as
// p += dv, q = exp(dw) * q, angles += dq.
Pose integrate(const Pose& pose, const Eigen::VectorXd& delta);

// Quaternion <-> rotation vector helpers (log/exp maps).
Eigen::Vector3d quat_log(const Eigen::Quaterniond& q);
Eigen::Quaterniond quat_exp(const Eigen::Vector3d& rotation_vector);

// A BVH skeleton expressed as a KinematicTree in the z-up world frame. Every
// non-root joint becomes a chain of revolute joints, one per rotation channel
// in declaration order; the last of the chain carries the BVH joint name.
// Joints without rotation channels and end sites become fixed frames.
struct BvhSkeleton {
    KinematicTree tree;
    // Frame columns of the root position and rotation channels (-1 if absent).
    std::array<int, 3> root_position_columns{-1, -1, -1};
    std::vector<std::pair<int, BvhChannel>> root_rotation_columns;
    // Frame column driving each degree of freedom.
    std::vector<int> dof_columns;
};

// Fixed change of basis from BVH y-up to world z-up: (x, y, z) -> (x, -z, y).
Eigen::Matrix3d bvh_to_world_rotation();

BvhSkeleton skeleton_from_bvh(const BvhDocument& doc);
Pose bvh_frame_pose(const BvhSkeleton& skeleton, const BvhDocument& doc, std::size_t frame);

} // namespace grk

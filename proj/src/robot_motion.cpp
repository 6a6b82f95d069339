#include "grk/robot_motion.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <cmath>

namespace grk {

void RobotMotion::resize(std::size_t frames)
{
    root_position.assign(frames, Eigen::Vector3d::Zero());
    root_orientation.assign(frames, Eigen::Quaterniond::Identity());
    root_linear_velocity.assign(frames, Eigen::Vector3d::Zero());
    root_angular_velocity.assign(frames, Eigen::Vector3d::Zero());
    joint_angles = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames),
                                         static_cast<Eigen::Index>(joint_names.size()));
}

Pose RobotMotion::pose(std::size_t frame) const
{
    Pose p;
    p.root_position = root_position.at(frame);
    p.root_orientation = root_orientation.at(frame);
    p.joint_angles = joint_angles.row(static_cast<Eigen::Index>(frame)).transpose();
    return p;
}

void RobotMotion::set_pose(std::size_t frame, const Pose& pose)
{
    root_position.at(frame) = pose.root_position;
    root_orientation.at(frame) = pose.root_orientation.normalized();
    joint_angles.row(static_cast<Eigen::Index>(frame)) = pose.joint_angles.transpose();
}

RobotMotion make_motion(const KinematicTree& tree, double frame_rate, std::size_t frames)
{
    RobotMotion m;
    m.frame_rate = frame_rate;
    m.joint_names = tree.dof_names();
    m.resize(frames);
    return m;
}

void validate(const RobotMotion& m)
{
    if (!(m.frame_rate > 0.0) || !std::isfinite(m.frame_rate)) fail_data("motion frame rate must be positive");
    const std::size_t n = m.root_position.size();
    if (m.root_orientation.size() != n || m.root_linear_velocity.size() != n || m.root_angular_velocity.size() != n ||
        static_cast<std::size_t>(m.joint_angles.rows()) != n)
        fail_data("motion arrays have inconsistent frame counts");
    if (static_cast<std::size_t>(m.joint_angles.cols()) != m.joint_names.size())
        fail_data("motion joint columns do not match joint names");
    if (!m.joint_angles.allFinite()) fail_data("motion joint angles contain non-finite values");
}

std::vector<std::string> motion_channel_names(const std::vector<std::string>& joint_names, bool extended)
{
    std::vector<std::string> names = {"root_pos_x", "root_pos_y", "root_pos_z",
                                      "root_vel_x", "root_vel_y", "root_vel_z"};
    names.insert(names.end(), joint_names.begin(), joint_names.end());
    if (extended) {
        for (const char* n : {"root_quat_w", "root_quat_x", "root_quat_y", "root_quat_z", "root_angvel_x",
                              "root_angvel_y", "root_angvel_z"})
            names.emplace_back(n);
    }
    return names;
}

MotionClip to_clip(const RobotMotion& m, bool extended)
{
    validate(m);
    MotionClip clip;
    clip.frame_rate = m.frame_rate;
    clip.channel_names = motion_channel_names(m.joint_names, extended);
    const auto n = static_cast<Eigen::Index>(m.frame_count());
    const auto joints = static_cast<Eigen::Index>(m.joint_names.size());
    clip.values.resize(n, static_cast<Eigen::Index>(clip.channel_names.size()));
    for (Eigen::Index f = 0; f < n; ++f) {
        const auto i = static_cast<std::size_t>(f);
        clip.values.block<1, 3>(f, 0) = m.root_position[i].transpose();
        clip.values.block<1, 3>(f, 3) = m.root_linear_velocity[i].transpose();
        clip.values.block(f, 6, 1, joints) = m.joint_angles.row(f);
        if (extended) {
            const auto& q = m.root_orientation[i];
            clip.values(f, 6 + joints) = q.w();
            clip.values(f, 7 + joints) = q.x();
            clip.values(f, 8 + joints) = q.y();
            clip.values(f, 9 + joints) = q.z();
            clip.values.block<1, 3>(f, 10 + joints) = m.root_angular_velocity[i].transpose();
        }
    }
    return clip;
}

RobotMotion from_clip(const MotionClip& clip)
{
    validate(clip);
    static const char* root_cols[] = {"root_pos_x", "root_pos_y", "root_pos_z", "root_vel_x", "root_vel_y", "root_vel_z"};
    for (std::size_t k = 0; k < 6; ++k)
        if (clip.channel_names.size() <= k || clip.channel_names[k] != root_cols[k])
            fail_data(std::string("motion file must start with root channels; expected ") + root_cols[k]);
    RobotMotion m;
    m.frame_rate = clip.frame_rate;
    std::size_t end = clip.channel_names.size();
    const int qw = clip.find_channel("root_quat_w");
    const int av = clip.find_channel("root_angvel_x");
    if (qw >= 0) end = std::min(end, static_cast<std::size_t>(qw));
    if (av >= 0) end = std::min(end, static_cast<std::size_t>(av));
    m.joint_names.assign(clip.channel_names.begin() + 6, clip.channel_names.begin() + static_cast<long>(end));
    m.resize(clip.frame_count());
    const auto joints = static_cast<Eigen::Index>(m.joint_names.size());
    for (Eigen::Index f = 0; f < clip.values.rows(); ++f) {
        const auto i = static_cast<std::size_t>(f);
        m.root_position[i] = clip.values.block<1, 3>(f, 0).transpose();
        m.root_linear_velocity[i] = clip.values.block<1, 3>(f, 3).transpose();
        m.joint_angles.row(f) = clip.values.block(f, 6, 1, joints);
        if (qw >= 0) {
            if (clip.channel_names.size() < static_cast<std::size_t>(qw) + 4) fail_data("incomplete root quaternion columns");
            Eigen::Quaterniond q(clip.values(f, qw), clip.values(f, qw + 1), clip.values(f, qw + 2), clip.values(f, qw + 3));
            if (q.norm() < 1e-12) fail_data("zero root quaternion at frame " + std::to_string(f));
            m.root_orientation[i] = q.normalized();
        }
        if (av >= 0) {
            if (clip.channel_names.size() < static_cast<std::size_t>(av) + 3) fail_data("incomplete angular velocity columns");
            m.root_angular_velocity[i] = clip.values.block<1, 3>(f, av).transpose();
        }
    }
    return m;
}

std::string write_robot_motion(const RobotMotion& motion, bool extended)
{
    const MotionClip clip = to_clip(motion, extended);
    std::string out = "frame_rate " + text::format_double(clip.frame_rate) + "\n";
    for (std::size_t i = 0; i < clip.channel_names.size(); ++i) {
        if (i) out += ' ';
        out += clip.channel_names[i];
    }
    out += '\n';
    for (Eigen::Index r = 0; r < clip.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < clip.values.cols(); ++c) {
            if (c) out += ' ';
            out += text::format_double(clip.values(r, c));
        }
        out += '\n';
    }
    return out;
}

RobotMotion parse_robot_motion(std::string_view src)
{
    // Same as the clip interchange format except that the rate and the
    // channel names sit on separate lines.
    std::vector<std::string_view> lines;
    for (auto line : text::split(src, '\n')) {
        line = text::trim(line);
        if (!line.empty() && line.front() != '#') lines.push_back(line);
    }
    if (lines.size() < 2) fail_data("motion file needs a frame_rate line and a channel-name line");
    auto head = text::split_ws(lines[0]);
    if (head.size() != 2 || head[0] != "frame_rate") fail_data("motion file must start with 'frame_rate <hz>'");
    std::string clip_text = "frame_rate " + std::string(head[1]) + " " + std::string(lines[1]) + "\n";
    for (std::size_t i = 2; i < lines.size(); ++i) {
        clip_text += lines[i];
        clip_text += '\n';
    }
    return from_clip(parse_clip(clip_text));
}

RobotMotion load_robot_motion(const std::string& path)
{
    return parse_robot_motion(text::read_file(path));
}

std::vector<BodyTransforms> motion_fk(const KinematicTree& tree, const RobotMotion& motion)
{
    if (motion.joint_names != tree.dof_names())
        fail_data("motion joint columns do not match the robot description's joints");
    std::vector<BodyTransforms> out;
    out.reserve(motion.frame_count());
    for (std::size_t f = 0; f < motion.frame_count(); ++f) out.push_back(forward_kinematics(tree, motion.pose(f)));
    return out;
}

} // namespace grk

#include "grk/kinematics.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace grk {

namespace {

constexpr double kAxisTol = 1e-9;
// BVH joints are unconstrained; a finite bound keeps description files parseable.
constexpr double kUnboundedLimit = 100.0;

} // namespace

KinematicTree::KinematicTree(std::string root_name, Eigen::Vector3d root_rest_position, bool root_is_key,
                             std::vector<JointSpec> joints)
    : root_name_(std::move(root_name)), root_rest_position_(std::move(root_rest_position)),
      root_is_key_(root_is_key), joints_(std::move(joints))
{
    if (root_name_.empty()) fail_data("root body needs a name");
    if (!root_rest_position_.allFinite()) fail_data("root rest position must be finite");
    std::set<std::string> names{root_name_};
    dof_of_joint_.assign(joints_.size(), -1);
    for (std::size_t i = 0; i < joints_.size(); ++i) {
        const JointSpec& j = joints_[i];
        if (j.name.empty()) fail_data("joint " + std::to_string(i) + " has no name");
        if (!names.insert(j.name).second) fail_data("duplicate joint name '" + j.name + "'");
        if (j.parent != kRootBody && (j.parent < 0 || j.parent >= static_cast<int>(i)))
            fail_data("joint '" + j.name + "' must come after its parent");
        if (!j.offset_in_parent.allFinite()) fail_data("joint '" + j.name + "' has a non-finite offset");
        if (!j.is_fixed()) {
            if (!j.axis.allFinite() || std::abs(j.axis.norm() - 1.0) > kAxisTol)
                fail_data("joint '" + j.name + "' axis is not a unit vector");
            if (!std::isfinite(j.limit_lower) || !std::isfinite(j.limit_upper) || j.limit_lower > j.limit_upper)
                fail_data("joint '" + j.name + "' has invalid limits");
            dof_of_joint_[i] = static_cast<int>(joint_of_dof_.size());
            joint_of_dof_.push_back(i);
        }
    }
}

std::vector<std::string> KinematicTree::dof_names() const
{
    std::vector<std::string> out;
    out.reserve(joint_of_dof_.size());
    for (auto j : joint_of_dof_) out.push_back(joints_[j].name);
    return out;
}

std::optional<int> KinematicTree::find_body(std::string_view name) const
{
    if (name == root_name_) return kRootBody;
    for (std::size_t i = 0; i < joints_.size(); ++i)
        if (joints_[i].name == name) return static_cast<int>(i);
    return std::nullopt;
}

std::string KinematicTree::body_name(int body) const
{
    return body == kRootBody ? root_name_ : joints_.at(static_cast<std::size_t>(body)).name;
}

bool KinematicTree::is_ancestor(int ancestor, int body) const
{
    if (ancestor == kRootBody) return true;
    for (int b = body; b != kRootBody; b = joints_[static_cast<std::size_t>(b)].parent)
        if (b == ancestor) return true;
    return false;
}

std::vector<int> KinematicTree::key_bodies() const
{
    std::vector<int> out;
    if (root_is_key_) out.push_back(kRootBody);
    for (std::size_t i = 0; i < joints_.size(); ++i)
        if (joints_[i].is_key_body) out.push_back(static_cast<int>(i));
    return out;
}

Eigen::VectorXd KinematicTree::lower_limits() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(dof_count()));
    for (std::size_t d = 0; d < dof_count(); ++d) v[static_cast<Eigen::Index>(d)] = joints_[joint_of_dof_[d]].limit_lower;
    return v;
}

Eigen::VectorXd KinematicTree::upper_limits() const
{
    Eigen::VectorXd v(static_cast<Eigen::Index>(dof_count()));
    for (std::size_t d = 0; d < dof_count(); ++d) v[static_cast<Eigen::Index>(d)] = joints_[joint_of_dof_[d]].limit_upper;
    return v;
}

KinematicTree parse_robot_description(std::string_view src)
{
    struct Line {
        std::string name, parent;
        Eigen::Vector3d offset, axis;
        double lower, upper;
        bool key;
        std::size_t line_no;
    };
    std::vector<Line> lines;
    std::size_t line_no = 0;
    for (std::string_view raw : text::split(src, '\n')) {
        ++line_no;
        std::string_view line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto t = text::split_ws(line);
        if (t.size() != 11)
            fail_data("description line " + std::to_string(line_no) + ": expected 11 fields, got " +
                      std::to_string(t.size()));
        Line l;
        l.name = std::string(t[0]);
        l.parent = std::string(t[1]);
        for (int k = 0; k < 3; ++k) l.offset[k] = text::parse_double(t[2 + k], "offset");
        for (int k = 0; k < 3; ++k) l.axis[k] = text::parse_double(t[5 + k], "axis");
        l.lower = text::parse_double(t[8], "lower limit");
        l.upper = text::parse_double(t[9], "upper limit");
        auto flag = text::parse_int(t[10], "key body flag");
        if (flag != 0 && flag != 1) fail_data("description line " + std::to_string(line_no) + ": key flag must be 0 or 1");
        l.key = flag == 1;
        l.line_no = line_no;
        lines.push_back(std::move(l));
    }

    std::map<std::string, std::size_t> by_name;
    const Line* root = nullptr;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!by_name.emplace(lines[i].name, i).second) fail_data("duplicate joint name '" + lines[i].name + "'");
        if (lines[i].parent == "-") {
            if (root) fail_data("description declares more than one root");
            root = &lines[i];
        }
    }
    if (!root) fail_data("description has no root line (parent '-')");
    for (const auto& l : lines)
        if (l.parent != "-" && !by_name.count(l.parent))
            fail_data("joint '" + l.name + "' references missing parent '" + l.parent + "'");

    // Topological order, keeping file order among siblings.
    std::vector<std::size_t> order;
    std::map<std::string, int> index{{root->name, kRootBody}};
    std::vector<bool> placed(lines.size(), false);
    placed[static_cast<std::size_t>(root - lines.data())] = true;
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t i = 0; i < lines.size(); ++i) {
            if (placed[i] || !index.count(lines[i].parent)) continue;
            index[lines[i].name] = static_cast<int>(order.size());
            order.push_back(i);
            placed[i] = true;
            progress = true;
        }
    }
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (!placed[i]) fail_data("cycle detected at joint '" + lines[i].name + "'");

    std::vector<JointSpec> joints;
    for (auto i : order) {
        const Line& l = lines[i];
        JointSpec j;
        j.name = l.name;
        j.parent = index.at(l.parent);
        j.offset_in_parent = l.offset;
        j.axis = l.axis;
        j.limit_lower = l.lower;
        j.limit_upper = l.upper;
        j.is_key_body = l.key;
        if (!j.is_fixed() && std::abs(j.axis.norm() - 1.0) > kAxisTol)
            fail_data("description line " + std::to_string(l.line_no) + ": axis of '" + l.name + "' is not unit length");
        joints.push_back(std::move(j));
    }
    return KinematicTree(root->name, root->offset, root->key, std::move(joints));
}

KinematicTree load_robot_description(const std::string& path)
{
    return parse_robot_description(text::read_file(path));
}

std::string write_robot_description(const KinematicTree& tree)
{
    std::ostringstream os;
    os << "# name parent offset_x offset_y offset_z axis_x axis_y axis_z lower upper key_body\n";
    auto vec = [&](const Eigen::Vector3d& v) {
        for (int k = 0; k < 3; ++k) os << ' ' << text::format_double(v[k]);
    };
    os << tree.root_name() << " -";
    vec(tree.root_rest_position());
    os << " 0 0 0 0 0 " << (tree.root_is_key_body() ? 1 : 0) << '\n';
    for (const auto& j : tree.joints()) {
        os << j.name << ' ' << tree.body_name(j.parent);
        vec(j.offset_in_parent);
        vec(j.axis);
        os << ' ' << text::format_double(j.limit_lower) << ' ' << text::format_double(j.limit_upper) << ' '
           << (j.is_key_body ? 1 : 0) << '\n';
    }
    return os.str();
}

Pose rest_pose(const KinematicTree& tree)
{
    Pose p;
    p.root_position = tree.root_rest_position();
    p.joint_angles = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tree.dof_count()));
    return clamp_to_limits(tree, p);
}

BodyTransforms forward_kinematics(const KinematicTree& tree, const Pose& pose)
{
    if (static_cast<std::size_t>(pose.joint_angles.size()) != tree.dof_count())
        fail_data("pose has " + std::to_string(pose.joint_angles.size()) + " joint angles, tree has " +
                  std::to_string(tree.dof_count()) + " degrees of freedom");
    BodyTransforms out;
    out.root_position = pose.root_position;
    out.root_orientation = pose.root_orientation.normalized();
    const std::size_t n = tree.body_count();
    out.positions.resize(n);
    out.orientations.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const JointSpec& j = tree.joint(i);
        const Eigen::Vector3d& pp = out.position(j.parent);
        const Eigen::Quaterniond& pq = out.orientation(j.parent);
        out.positions[i] = pp + pq * j.offset_in_parent;
        const int dof = tree.dof_of_joint(i);
        if (dof < 0) {
            out.orientations[i] = pq;
        } else {
            out.orientations[i] = pq * Eigen::Quaterniond(Eigen::AngleAxisd(pose.joint_angles[dof], j.axis));
        }
    }
    return out;
}

Jacobian jacobian(const KinematicTree& tree, const BodyTransforms& fk, int body)
{
    if (body != kRootBody && (body < 0 || static_cast<std::size_t>(body) >= tree.body_count()))
        fail_usage("invalid body index " + std::to_string(body));
    const auto cols = static_cast<Eigen::Index>(6 + tree.dof_count());
    Jacobian J = Jacobian::Zero(6, cols);
    const Eigen::Vector3d& p = fk.position(body);
    J.block<3, 3>(0, 0).setIdentity();
    const Eigen::Vector3d r = p - fk.root_position;
    for (int k = 0; k < 3; ++k) {
        J.block<3, 1>(0, 3 + k) = Eigen::Vector3d::Unit(k).cross(r);
    }
    J.block<3, 3>(3, 3).setIdentity();
    for (int b = body; b != kRootBody; b = tree.joint(static_cast<std::size_t>(b)).parent) {
        const int dof = tree.dof_of_joint(static_cast<std::size_t>(b));
        if (dof < 0) continue;
        const JointSpec& j = tree.joint(static_cast<std::size_t>(b));
        const Eigen::Vector3d axis = fk.orientations[static_cast<std::size_t>(b)] * j.axis;
        J.block<3, 1>(0, 6 + dof) = axis.cross(p - fk.positions[static_cast<std::size_t>(b)]);
        J.block<3, 1>(3, 6 + dof) = axis;
    }
    return J;
}

Jacobian jacobian(const KinematicTree& tree, const Pose& pose, int body)
{
    return jacobian(tree, forward_kinematics(tree, pose), body);
}

Pose clamp_to_limits(const KinematicTree& tree, const Pose& pose)
{
    Pose out = pose;
    for (std::size_t d = 0; d < tree.dof_count() && d < static_cast<std::size_t>(out.joint_angles.size()); ++d) {
        const JointSpec& j = tree.joint(tree.joint_of_dof(d));
        auto& a = out.joint_angles[static_cast<Eigen::Index>(d)];
        if (std::isnan(a)) continue;
        a = std::clamp(a, j.limit_lower, j.limit_upper);
    }
    return out;
}

Eigen::Vector3d quat_log(const Eigen::Quaterniond& q_in)
{
    Eigen::Quaterniond q = q_in.normalized();
    if (q.w() < 0.0) q.coeffs() = -q.coeffs();
    const Eigen::Vector3d v = q.vec();
    const double s = v.norm();
    if (s < 1e-12) return 2.0 * v / q.w();
    const double angle = 2.0 * std::atan2(s, q.w());
    return v * (angle / s);
}

Eigen::Quaterniond quat_exp(const Eigen::Vector3d& r)
{
    const double angle = r.norm();
    const double half = 0.5 * angle;
    // sin(half)/angle with a series expansion near zero.
    const double k = angle < 1e-8 ? 0.5 - angle * angle / 48.0 : std::sin(half) / angle;
    Eigen::Quaterniond q(std::cos(half), k * r.x(), k * r.y(), k * r.z());
    return q.normalized();
}

Pose integrate(const Pose& pose, const Eigen::VectorXd& delta)
{
    Pose out = pose;
    out.root_position += delta.segment<3>(0);
    out.root_orientation = (quat_exp(delta.segment<3>(3)) * pose.root_orientation).normalized();
    out.joint_angles += delta.tail(delta.size() - 6);
    return out;
}

Eigen::Matrix3d bvh_to_world_rotation()
{
    Eigen::Matrix3d m;
    m << 1, 0, 0,
         0, 0, -1,
         0, 1, 0;
    return m;
}

BvhSkeleton skeleton_from_bvh(const BvhDocument& doc)
{
    validate(doc);
    const Eigen::Matrix3d up = bvh_to_world_rotation();
    const auto flat = flatten(doc);

    BvhSkeleton sk;
    std::vector<JointSpec> joints;
    std::vector<int> tree_index(flat.size(), kRootBody); // last tree body of each BVH joint
    for (std::size_t i = 1; i < flat.size(); ++i) {
        const BvhJoint& bj = *flat[i].joint;
        int parent = tree_index[static_cast<std::size_t>(flat[i].parent)];
        std::vector<std::pair<std::size_t, BvhChannel>> rotations;
        for (std::size_t c = 0; c < bj.channels.size(); ++c)
            if (is_rotation(bj.channels[c])) rotations.emplace_back(flat[i].first_channel + c, bj.channels[c]);

        if (rotations.empty()) {
            JointSpec j;
            j.name = bj.name;
            j.parent = parent;
            j.offset_in_parent = up * bj.offset;
            j.axis = Eigen::Vector3d::Zero();
            j.is_key_body = !bj.is_end_site;
            joints.push_back(std::move(j));
            tree_index[i] = static_cast<int>(joints.size() - 1);
            continue;
        }
        for (std::size_t k = 0; k < rotations.size(); ++k) {
            const auto [column, ch] = rotations[k];
            JointSpec j;
            const bool last = k + 1 == rotations.size();
            j.name = last ? bj.name : bj.name + "." + std::string(1, "xyz"[channel_axis(ch)]);
            j.parent = parent;
            j.offset_in_parent = k == 0 ? Eigen::Vector3d(up * bj.offset) : Eigen::Vector3d::Zero();
            j.axis = up * Eigen::Vector3d::Unit(channel_axis(ch));
            j.limit_lower = -kUnboundedLimit;
            j.limit_upper = kUnboundedLimit;
            j.is_key_body = last;
            joints.push_back(std::move(j));
            parent = static_cast<int>(joints.size() - 1);
            sk.dof_columns.push_back(static_cast<int>(column));
        }
        tree_index[i] = parent;
    }

    const BvhJoint& root = doc.root;
    for (std::size_t c = 0; c < root.channels.size(); ++c) {
        if (is_rotation(root.channels[c]))
            sk.root_rotation_columns.emplace_back(static_cast<int>(c), root.channels[c]);
        else
            sk.root_position_columns[static_cast<std::size_t>(channel_axis(root.channels[c]))] = static_cast<int>(c);
    }

    // Rest placement: the root offset horizontally, height chosen so the lowest
    // rest body touches z = 0.
    KinematicTree provisional(root.name, Eigen::Vector3d::Zero(), true, joints);
    Pose zero;
    zero.joint_angles = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(provisional.dof_count()));
    const auto fk = forward_kinematics(provisional, zero);
    double lowest = 0.0;
    for (const auto& p : fk.positions) lowest = std::min(lowest, p.z());
    Eigen::Vector3d rest = up * root.offset;
    rest.z() = -lowest;
    sk.tree = KinematicTree(root.name, rest, true, std::move(joints));
    return sk;
}

Pose bvh_frame_pose(const BvhSkeleton& sk, const BvhDocument& doc, std::size_t frame)
{
    if (frame >= doc.frame_count()) fail_usage("frame index " + std::to_string(frame) + " out of range");
    const Eigen::Matrix3d up = bvh_to_world_rotation();
    const auto row = doc.frames.row(static_cast<Eigen::Index>(frame));
    Pose pose;
    Eigen::Vector3d local = doc.root.offset;
    for (int k = 0; k < 3; ++k)
        if (sk.root_position_columns[static_cast<std::size_t>(k)] >= 0)
            local[k] += row[sk.root_position_columns[static_cast<std::size_t>(k)]];
    pose.root_position = up * local;
    Eigen::Quaterniond q = Eigen::Quaterniond::Identity();
    for (const auto& [column, ch] : sk.root_rotation_columns)
        q = q * Eigen::Quaterniond(Eigen::AngleAxisd(row[column], Eigen::Vector3d::Unit(channel_axis(ch))));
    const Eigen::Quaterniond upq(up);
    pose.root_orientation = (upq * q * upq.conjugate()).normalized();
    pose.joint_angles.resize(static_cast<Eigen::Index>(sk.dof_columns.size()));
    for (std::size_t d = 0; d < sk.dof_columns.size(); ++d)
        pose.joint_angles[static_cast<Eigen::Index>(d)] = row[sk.dof_columns[d]];
    return pose;
}

} // namespace grk

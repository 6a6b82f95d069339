#include "grk/control_map.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cmath>

namespace grk {

ActionScale default_action_scale(const KinematicTree& tree)
{
    const auto names = tree.dof_names();
    ActionScale s;
    s.scale.resize(static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        const auto& n = names[i];
        const bool arm = n.find("shoulder") != std::string::npos || n.find("elbow") != std::string::npos ||
                         n.find("wrist") != std::string::npos;
        s.scale[static_cast<Eigen::Index>(i)] = arm ? 0.6 : 0.3;
    }
    return s;
}

ActionScale parse_action_scale(std::string_view src, const KinematicTree& tree)
{
    ActionScale s = default_action_scale(tree);
    const auto names = tree.dof_names();
    std::size_t line_no = 0;
    for (auto line : text::split(src, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto t = text::split_ws(line);
        if (t.size() != 2) fail_data("scale line " + std::to_string(line_no) + ": expected 'joint_name scale'");
        auto it = std::find(names.begin(), names.end(), t[0]);
        if (it == names.end()) fail_data("scale line " + std::to_string(line_no) + ": unknown joint '" + std::string(t[0]) + "'");
        s.scale[it - names.begin()] = text::parse_double(t[1], "scale");
    }
    validate(s, tree);
    return s;
}

void validate(const ActionScale& s, const KinematicTree& tree)
{
    if (static_cast<std::size_t>(s.scale.size()) != tree.dof_count())
        fail_data("action scale has " + std::to_string(s.scale.size()) + " entries, the robot has " +
                  std::to_string(tree.dof_count()) + " joints");
    if (!s.scale.allFinite() || !(s.scale.array() > 0.0).all()) fail_data("action scales must be positive and finite");
}

Eigen::VectorXd residual_to_pd_target(const Eigen::VectorXd& reference, const Eigen::VectorXd& action,
                                      const ActionScale& scale, const KinematicTree& tree)
{
    validate(scale, tree);
    const auto n = static_cast<Eigen::Index>(tree.dof_count());
    if (reference.size() != n || action.size() != n)
        fail_data("reference and action vectors need " + std::to_string(n) + " entries");
    if (!action.allFinite()) fail_data("action contains non-finite entries");
    if (!reference.allFinite()) fail_data("reference contains non-finite entries");
    const Eigen::VectorXd raw = reference + scale.scale.cwiseProduct(action.array().tanh().matrix());
    return raw.cwiseMax(tree.lower_limits()).cwiseMin(tree.upper_limits());
}

RobotMotion apply_to_motion(const RobotMotion& motion, const Eigen::MatrixXd& actions, const ActionScale& scale,
                            const KinematicTree& tree)
{
    validate(motion);
    if (motion.joint_names != tree.dof_names()) fail_data("motion joints do not match the robot description");
    if (actions.rows() != motion.joint_angles.rows() || actions.cols() != motion.joint_angles.cols())
        fail_data("action matrix is " + std::to_string(actions.rows()) + "x" + std::to_string(actions.cols()) +
                  ", expected " + std::to_string(motion.joint_angles.rows()) + "x" +
                  std::to_string(motion.joint_angles.cols()));
    RobotMotion out = motion;
    for (Eigen::Index f = 0; f < actions.rows(); ++f)
        out.joint_angles.row(f) =
            residual_to_pd_target(motion.joint_angles.row(f).transpose(), actions.row(f).transpose(), scale, tree)
                .transpose();
    return out;
}

Eigen::MatrixXd parse_matrix(std::string_view src)
{
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 0;
    for (auto line : text::split(src, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        std::vector<double> row;
        for (auto t : text::split_ws(line)) row.push_back(text::parse_double(t, "matrix entry"));
        if (!rows.empty() && row.size() != rows.front().size())
            fail_data("matrix line " + std::to_string(line_no) + ": inconsistent column count");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return m;
}

} // namespace grk

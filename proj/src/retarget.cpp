#include "grk/retarget.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grk {

// ---- correspondence and configuration ------------------------------------

Correspondence parse_correspondence(std::string_view src)
{
    Correspondence corr;
    std::size_t line_no = 0;
    for (std::string_view line : text::split(src, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto t = text::split_ws(line);
        if (t.size() != 5)
            fail_data("correspondence line " + std::to_string(line_no) + ": expected 5 fields, got " +
                      std::to_string(t.size()));
        CorrespondencePair p;
        p.human_body = std::string(t[0]);
        p.robot_body = std::string(t[1]);
        p.weight_position = text::parse_double(t[2], "position weight");
        p.weight_orientation = text::parse_double(t[3], "orientation weight");
        const auto ee = text::parse_int(t[4], "end effector flag");
        if (ee != 0 && ee != 1) fail_data("correspondence line " + std::to_string(line_no) + ": ee flag must be 0 or 1");
        p.end_effector = ee == 1;
        corr.pairs.push_back(std::move(p));
    }
    return corr;
}

std::string write_correspondence(const Correspondence& corr)
{
    std::ostringstream os;
    os << "# human_body robot_body w_pos w_ori ee_flag\n";
    for (const auto& p : corr.pairs)
        os << p.human_body << ' ' << p.robot_body << ' ' << text::format_double(p.weight_position) << ' '
           << text::format_double(p.weight_orientation) << ' ' << (p.end_effector ? 1 : 0) << '\n';
    return os.str();
}

void validate(const Correspondence& corr, const KinematicTree& human, const KinematicTree& robot)
{
    bool has_ee = false, has_ori = false;
    for (const auto& p : corr.pairs) {
        if (!human.find_body(p.human_body)) fail_data("correspondence: unknown human body '" + p.human_body + "'");
        if (!robot.find_body(p.robot_body)) fail_data("correspondence: unknown robot body '" + p.robot_body + "'");
        if (!std::isfinite(p.weight_position) || !std::isfinite(p.weight_orientation) || p.weight_position < 0.0 ||
            p.weight_orientation < 0.0)
            fail_data("correspondence: weights of '" + p.human_body + "' must be finite and non-negative");
        has_ee = has_ee || p.end_effector;
        has_ori = has_ori || p.weight_orientation > 0.0;
    }
    if (!has_ee) fail_data("correspondence needs at least one end-effector pair");
    if (!has_ori) fail_data("correspondence needs at least one orientation-weighted pair");
}

RetargetConfig retarget_config_from(const KeyValueConfig& cfg)
{
    RetargetConfig c;
    for (const auto& [bone, value] : cfg.with_prefix("scale.")) c.local_scale_per_bone[bone] = text::parse_double(value, "scale." + bone);
    if (auto v = cfg.get("root_translation_scale"); v && *v != "auto")
        c.root_translation_scale = text::parse_double(*v, "root_translation_scale");
    c.damping_lambda = cfg.get_double("damping_lambda", c.damping_lambda);
    c.max_iterations_stage1 = static_cast<int>(cfg.get_int("max_iterations_stage1", c.max_iterations_stage1));
    c.max_iterations_stage2 = static_cast<int>(cfg.get_int("max_iterations_stage2", c.max_iterations_stage2));
    c.convergence_tol = cfg.get_double("convergence_tol", c.convergence_tol);
    c.ground_height = cfg.get_double("ground_height", c.ground_height);
    if (auto v = cfg.get("ablation_root_axis_scale")) {
        auto t = text::split_ws(*v);
        if (t.size() != 3) fail_data("ablation_root_axis_scale needs three values");
        Eigen::Vector3d s;
        for (int k = 0; k < 3; ++k) s[k] = text::parse_double(t[static_cast<std::size_t>(k)], "ablation_root_axis_scale");
        c.ablation_root_axis_scale = s;
    }
    validate(c);
    return c;
}

void validate(const RetargetConfig& c)
{
    for (const auto& [bone, s] : c.local_scale_per_bone)
        if (!(s > 0.0) || !std::isfinite(s)) fail_data("scale of bone '" + bone + "' must be positive");
    if (c.root_translation_scale && !(*c.root_translation_scale > 0.0 && std::isfinite(*c.root_translation_scale)))
        fail_data("root_translation_scale must be positive");
    if (c.ablation_root_axis_scale && !(c.ablation_root_axis_scale->array() > 0.0).all())
        fail_data("ablation_root_axis_scale entries must be positive");
    if (!(c.damping_lambda > 0.0) || !std::isfinite(c.damping_lambda)) fail_data("damping_lambda must be positive");
    if (c.max_iterations_stage1 <= 0 || c.max_iterations_stage2 <= 0) fail_data("iteration caps must be positive");
    if (!(c.convergence_tol >= 0.0)) fail_data("convergence_tol must be non-negative");
    if (!std::isfinite(c.ground_height)) fail_data("ground_height must be finite");
}

// ---- rest alignment -------------------------------------------------------

RigidTransform RigidTransform::inverse() const
{
    RigidTransform inv;
    inv.rotation = rotation.conjugate();
    inv.translation = -(inv.rotation * translation);
    return inv;
}

BodyTarget RestAlignment::target(std::size_t i, const Eigen::Vector3d& human_position,
                                 const Eigen::Quaterniond& human_orientation) const
{
    const RigidTransform to_robot = robot_to_human.inverse();
    BodyTarget t;
    t.position = to_robot.apply(human_position) + to_robot.rotation * (human_orientation * position_offsets[i]);
    t.orientation = (to_robot.rotation * human_orientation * orientation_offsets[i]).normalized();
    return t;
}

namespace {

std::vector<BodyTarget> rest_targets(const KinematicTree& tree, const std::vector<std::string>& bodies)
{
    const auto fk = forward_kinematics(tree, rest_pose(tree));
    std::vector<BodyTarget> out;
    for (const auto& name : bodies) {
        const int b = *tree.find_body(name);
        out.push_back({fk.position(b), fk.orientation(b)});
    }
    return out;
}

std::vector<std::string> human_names(const Correspondence& corr)
{
    std::vector<std::string> v;
    for (const auto& p : corr.pairs) v.push_back(p.human_body);
    return v;
}

std::vector<std::string> robot_names(const Correspondence& corr)
{
    std::vector<std::string> v;
    for (const auto& p : corr.pairs) v.push_back(p.robot_body);
    return v;
}

} // namespace

RestAlignment align_rest_pose(const std::vector<BodyTarget>& human_rest, const KinematicTree& robot,
                              const Correspondence& corr)
{
    const std::size_t n = corr.pairs.size();
    if (human_rest.size() != n) fail_usage("one human rest pose per correspondence pair is required");
    const auto robot_rest = rest_targets(robot, robot_names(corr));

    Eigen::MatrixXd centered(3, static_cast<Eigen::Index>(n));
    Eigen::Vector3d mean_h = Eigen::Vector3d::Zero(), mean_r = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        mean_h += human_rest[i].position;
        mean_r += robot_rest[i].position;
    }
    if (n > 0) {
        mean_h /= static_cast<double>(n);
        mean_r /= static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) centered.col(static_cast<Eigen::Index>(i)) = human_rest[i].position - mean_h;
    bool enough = n >= 3;
    if (enough) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered);
        const auto& sv = svd.singularValues();
        enough = sv.size() >= 2 && sv[1] > 1e-9 * std::max(1.0, sv[0]);
    }
    if (!enough) fail_data("rest alignment needs at least 3 non-collinear correspondence points");

    // Yaw about the vertical axis from the horizontal cross-covariance.
    double s_dot = 0.0, s_cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector2d a = (robot_rest[i].position - mean_r).head<2>();
        const Eigen::Vector2d b = (human_rest[i].position - mean_h).head<2>();
        s_dot += a.dot(b);
        s_cross += a.x() * b.y() - a.y() * b.x();
    }
    const double yaw = (s_dot == 0.0 && s_cross == 0.0) ? 0.0 : std::atan2(s_cross, s_dot);

    RestAlignment al;
    al.robot_to_human.rotation = Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()));
    const Eigen::Vector3d rotated_mean = al.robot_to_human.rotation * mean_r;
    double low_h = human_rest.front().position.z(), low_r = robot_rest.front().position.z();
    for (std::size_t i = 0; i < n; ++i) {
        low_h = std::min(low_h, human_rest[i].position.z());
        low_r = std::min(low_r, robot_rest[i].position.z());
    }
    al.robot_to_human.translation = Eigen::Vector3d(mean_h.x() - rotated_mean.x(), mean_h.y() - rotated_mean.y(),
                                                    low_h - low_r);

    const RigidTransform to_robot = al.robot_to_human.inverse();
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Quaterniond& qh = human_rest[i].orientation;
        const Eigen::Vector3d residual = robot_rest[i].position - to_robot.apply(human_rest[i].position);
        al.position_offsets.push_back(qh.conjugate() * (al.robot_to_human.rotation * residual));
        al.orientation_offsets.push_back(
            (qh.conjugate() * al.robot_to_human.rotation * robot_rest[i].orientation).normalized());
    }
    return al;
}

RestAlignment align_rest_pose(const KinematicTree& human, const KinematicTree& robot, const Correspondence& corr)
{
    validate(corr, human, robot);
    return align_rest_pose(rest_targets(human, human_names(corr)), robot, corr);
}

// ---- scaling ----------------------------------------------------------------

ScaleFactors resolve_scales(const KinematicTree& human, const KinematicTree& robot, const Correspondence& corr,
                            const RetargetConfig& config)
{
    validate(corr, human, robot);
    validate(config);
    const std::size_t n = corr.pairs.size();
    std::vector<int> hb(n), rb(n);
    for (std::size_t i = 0; i < n; ++i) {
        hb[i] = *human.find_body(corr.pairs[i].human_body);
        rb[i] = *robot.find_body(corr.pairs[i].robot_body);
    }
    for (const auto& [bone, s] : config.local_scale_per_bone) {
        (void)s;
        if (std::none_of(corr.pairs.begin(), corr.pairs.end(), [&](const auto& p) { return p.human_body == bone; }))
            fail_data("scale given for unknown bone '" + bone + "'");
    }

    ScaleFactors sf;
    sf.parent_pair.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (hb[i] == kRootBody) continue;
        for (int b = human.parent_of(hb[i]);; b = human.parent_of(b)) {
            auto it = std::find(hb.begin(), hb.end(), b);
            if (it != hb.end()) {
                sf.parent_pair[i] = static_cast<int>(it - hb.begin());
                break;
            }
            if (b == kRootBody) break;
        }
    }

    const auto hfk = forward_kinematics(human, rest_pose(human));
    const auto rfk = forward_kinematics(robot, rest_pose(robot));
    sf.bone_scale.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (auto it = config.local_scale_per_bone.find(corr.pairs[i].human_body); it != config.local_scale_per_bone.end()) {
            sf.bone_scale[i] = it->second;
            continue;
        }
        const int pp = sf.parent_pair[i];
        const Eigen::Vector3d hp = pp < 0 ? hfk.root_position : hfk.position(hb[static_cast<std::size_t>(pp)]);
        const Eigen::Vector3d rp = pp < 0 ? rfk.root_position : rfk.position(rb[static_cast<std::size_t>(pp)]);
        const double lh = (hfk.position(hb[i]) - hp).norm();
        const double lr = (rfk.position(rb[i]) - rp).norm();
        sf.bone_scale[i] = lh > 1e-9 && lr > 1e-9 ? lr / lh : 1.0;
    }

    if (config.root_translation_scale) {
        sf.root_translation_scale = *config.root_translation_scale;
    } else {
        double low_h = hfk.root_position.z(), low_r = rfk.root_position.z();
        for (std::size_t i = 0; i < n; ++i) {
            low_h = std::min(low_h, hfk.position(hb[i]).z());
            low_r = std::min(low_r, rfk.position(rb[i]).z());
        }
        const double leg_h = hfk.root_position.z() - low_h;
        const double leg_r = rfk.root_position.z() - low_r;
        sf.root_translation_scale = leg_h > 1e-9 && leg_r > 1e-9 ? leg_r / leg_h : 1.0;
    }
    return sf;
}

KeyTrajectories scale_source_motion(const KinematicTree& human, const std::vector<Pose>& poses,
                                    const Correspondence& corr, const ScaleFactors& scales,
                                    const RetargetConfig& config)
{
    const std::size_t n = corr.pairs.size();
    if (scales.bone_scale.size() != n || scales.parent_pair.size() != n)
        fail_usage("scale factors do not match the correspondence");
    std::vector<int> hb(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto b = human.find_body(corr.pairs[i].human_body);
        if (!b) fail_data("unknown human body '" + corr.pairs[i].human_body + "'");
        hb[i] = *b;
    }
    // Parents before children.
    std::vector<std::size_t> order;
    std::vector<bool> done(n, false);
    while (order.size() < n) {
        const std::size_t before = order.size();
        for (std::size_t i = 0; i < n; ++i) {
            const int pp = scales.parent_pair[i];
            if (!done[i] && (pp < 0 || done[static_cast<std::size_t>(pp)])) {
                order.push_back(i);
                done[i] = true;
            }
        }
        if (order.size() == before) fail_usage("cyclic bone hierarchy in scale factors");
    }

    const Eigen::Vector3d root_scale = config.ablation_root_axis_scale.value_or(
        Eigen::Vector3d::Constant(scales.root_translation_scale));

    KeyTrajectories out;
    out.positions.assign(n, std::vector<Eigen::Vector3d>(poses.size()));
    out.orientations.assign(n, std::vector<Eigen::Quaterniond>(poses.size()));
    for (std::size_t f = 0; f < poses.size(); ++f) {
        const auto fk = forward_kinematics(human, poses[f]);
        const Eigen::Vector3d root = root_scale.cwiseProduct(fk.root_position);
        for (auto i : order) {
            const int pp = scales.parent_pair[i];
            const Eigen::Vector3d parent_src = pp < 0 ? fk.root_position : fk.position(hb[static_cast<std::size_t>(pp)]);
            const Eigen::Vector3d parent_dst = pp < 0 ? root : out.positions[static_cast<std::size_t>(pp)][f];
            out.positions[i][f] = parent_dst + scales.bone_scale[i] * (fk.position(hb[i]) - parent_src);
            out.orientations[i][f] = fk.orientation(hb[i]);
        }
    }
    return out;
}

// ---- differential IK --------------------------------------------------------

IkProblem::IkProblem(const KinematicTree& robot, const Correspondence& corr) : robot_(&robot), corr_(&corr)
{
    double wmax = 0.0;
    for (const auto& p : corr.pairs) {
        auto b = robot.find_body(p.robot_body);
        if (!b) fail_data("unknown robot body '" + p.robot_body + "'");
        bodies_.push_back(*b);
        wmax = std::max({wmax, p.weight_position, p.weight_orientation});
    }
    // Normalizing by the largest weight makes the iterates invariant to a
    // common rescaling of all weights.
    weight_norm_ = wmax > 0.0 ? wmax : 1.0;
}

void IkProblem::residual(const Pose& pose, const BodyTransforms& fk, const FrameTargets& targets, int stage,
                         Eigen::VectorXd& r, Eigen::MatrixXd* jac) const
{
    (void)pose;
    const auto& pairs = corr_->pairs;
    if (targets.size() != pairs.size()) fail_usage("one target per correspondence pair is required");
    std::size_t rows = 0;
    for (const auto& p : pairs) {
        if (p.weight_orientation > 0.0) rows += 3;
        if (p.weight_position > 0.0 && (stage == 2 || p.end_effector)) rows += 3;
    }
    const auto cols = static_cast<Eigen::Index>(6 + robot_->dof_count());
    r.resize(static_cast<Eigen::Index>(rows));
    if (jac) jac->resize(static_cast<Eigen::Index>(rows), cols);
    Eigen::Index row = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& p = pairs[i];
        const bool use_ori = p.weight_orientation > 0.0;
        const bool use_pos = p.weight_position > 0.0 && (stage == 2 || p.end_effector);
        if (!use_ori && !use_pos) continue;
        Jacobian J;
        if (jac) J = jacobian(*robot_, fk, bodies_[i]);
        if (use_ori) {
            const double w = std::sqrt(p.weight_orientation / weight_norm_);
            r.segment<3>(row) = w * quat_log(targets[i].orientation * fk.orientation(bodies_[i]).conjugate());
            if (jac) jac->middleRows<3>(row) = w * J.bottomRows<3>();
            row += 3;
        }
        if (use_pos) {
            const double w = std::sqrt(p.weight_position / weight_norm_);
            r.segment<3>(row) = w * (targets[i].position - fk.position(bodies_[i]));
            if (jac) jac->middleRows<3>(row) = w * J.topRows<3>();
            row += 3;
        }
    }
}

double IkProblem::objective(const Pose& pose, const FrameTargets& targets, int stage) const
{
    Eigen::VectorXd r;
    residual(pose, forward_kinematics(*robot_, pose), targets, stage, r, nullptr);
    return r.squaredNorm();
}

Pose IkProblem::solve(const FrameTargets& targets, const Pose& init, const RetargetConfig& config, int stage) const
{
    Pose pose = clamp_to_limits(*robot_, init);
    const int max_iter = stage == 1 ? config.max_iterations_stage1 : config.max_iterations_stage2;
    const double damping = config.damping_lambda * config.damping_lambda;
    const auto cols = static_cast<Eigen::Index>(6 + robot_->dof_count());

    Eigen::VectorXd r;
    Eigen::MatrixXd J;
    auto fk = forward_kinematics(*robot_, pose);
    residual(pose, fk, targets, stage, r, &J);
    if (!r.allFinite()) fail_data("non-finite IK residual (bad targets)");
    double f = r.squaredNorm();

    for (int it = 0; it < max_iter; ++it) {
        if (std::sqrt(f) <= config.convergence_tol) break;
        Eigen::MatrixXd A = J.transpose() * J;
        A.diagonal().array() += damping;
        const Eigen::VectorXd step = A.ldlt().solve(J.transpose() * r);
        if (!step.allFinite()) fail_data("non-finite IK step");

        // Backtracking keeps the objective monotone under limit clamping.
        bool accepted = false;
        double alpha = 1.0;
        for (int k = 0; k < 12; ++k, alpha *= 0.5) {
            Pose cand = clamp_to_limits(*robot_, integrate(pose, alpha * step));
            auto cfk = forward_kinematics(*robot_, cand);
            Eigen::VectorXd cr;
            residual(cand, cfk, targets, stage, cr, nullptr);
            const double cf = cr.squaredNorm();
            if (!std::isfinite(cf)) fail_data("non-finite IK residual (bad targets)");
            if (cf < f) {
                pose = std::move(cand);
                fk = std::move(cfk);
                f = cf;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
        residual(pose, fk, targets, stage, r, &J);
        if ((alpha * step).lpNorm<Eigen::Infinity>() < 1e-14) break;
    }
    (void)cols;
    return pose;
}

Pose stage1_solve(const IkProblem& problem, const FrameTargets& targets, const Pose& warm_start,
                  const RetargetConfig& config)
{
    return problem.solve(targets, warm_start, config, 1);
}

Pose stage2_solve(const IkProblem& problem, const FrameTargets& targets, const Pose& init,
                  const RetargetConfig& config)
{
    return problem.solve(targets, init, config, 2);
}

// ---- whole clips --------------------------------------------------------------

RobotMotion retarget_poses(const std::vector<Pose>& human_poses, double frame_rate, const KinematicTree& human,
                           const KinematicTree& robot, const Correspondence& corr, const RetargetConfig& config,
                           RetargetDiagnostics* diagnostics)
{
    validate(corr, human, robot);
    validate(config);
    if (human_poses.empty()) fail_data("cannot retarget an empty clip");

    const ScaleFactors scales = resolve_scales(human, robot, corr, config);
    const KeyTrajectories rest = scale_source_motion(human, {rest_pose(human)}, corr, scales, config);
    std::vector<BodyTarget> human_rest;
    for (std::size_t i = 0; i < corr.pairs.size(); ++i)
        human_rest.push_back({rest.positions[i][0], rest.orientations[i][0]});
    const RestAlignment alignment = align_rest_pose(human_rest, robot, corr);
    const KeyTrajectories traj = scale_source_motion(human, human_poses, corr, scales, config);

    const IkProblem problem(robot, corr);
    RobotMotion motion = make_motion(robot, frame_rate, human_poses.size());
    if (diagnostics) {
        diagnostics->stage1_objective.assign(human_poses.size(), 0.0);
        diagnostics->stage2_objective.assign(human_poses.size(), 0.0);
    }

    Pose warm = rest_pose(robot);
    FrameTargets targets(corr.pairs.size());
    for (std::size_t f = 0; f < human_poses.size(); ++f) {
        for (std::size_t i = 0; i < corr.pairs.size(); ++i)
            targets[i] = alignment.target(i, traj.positions[i][f], traj.orientations[i][f]);
        Pose solved;
        try {
            const Pose s1 = stage1_solve(problem, targets, warm, config);
            solved = stage2_solve(problem, targets, s1, config);
            if (diagnostics) {
                diagnostics->stage1_objective[f] = problem.objective(s1, targets, 2);
                diagnostics->stage2_objective[f] = problem.objective(solved, targets, 2);
            }
        } catch (const Error& e) {
            throw Error(e.kind(), "frame " + std::to_string(f) + ": " + e.what());
        }

        solved = project_to_ground(robot, solved, config.ground_height);
        motion.set_pose(f, solved);
        warm = solved;
    }
    if (motion.frame_count() >= 2) motion = compute_root_velocities(std::move(motion));
    return motion;
}

RobotMotion retarget_clip(const BvhDocument& clip, const KinematicTree& robot, const Correspondence& corr,
                          const RetargetConfig& config, RetargetDiagnostics* diagnostics)
{
    const BvhSkeleton sk = skeleton_from_bvh(clip);
    std::vector<Pose> poses;
    poses.reserve(clip.frame_count());
    for (std::size_t f = 0; f < clip.frame_count(); ++f) poses.push_back(bvh_frame_pose(sk, clip, f));
    return retarget_poses(poses, 1.0 / clip.frame_time, sk.tree, robot, corr, config, diagnostics);
}

Pose project_to_ground(const KinematicTree& robot, Pose pose, double ground_height)
{
    const auto fk = forward_kinematics(robot, pose);
    double lowest = fk.root_position.z();
    for (const auto& p : fk.positions) lowest = std::min(lowest, p.z());
    if (lowest < ground_height) pose.root_position.z() += ground_height - lowest;
    return pose;
}

RobotMotion project_to_ground(const KinematicTree& robot, RobotMotion motion, double ground_height)
{
    for (std::size_t f = 0; f < motion.frame_count(); ++f)
        motion.set_pose(f, project_to_ground(robot, motion.pose(f), ground_height));
    if (motion.frame_count() >= 2) motion = compute_root_velocities(std::move(motion));
    return motion;
}

RobotMotion compute_root_velocities(RobotMotion m)
{
    const std::size_t n = m.frame_count();
    if (n < 2) fail_data("root velocities need at least two frames");
    const double fps = m.frame_rate;
    std::vector<Eigen::Vector3d> w_step(n - 1); // rotation-vector rate between t and t+1
    for (std::size_t t = 0; t + 1 < n; ++t)
        w_step[t] = quat_log(m.root_orientation[t + 1] * m.root_orientation[t].conjugate()) * fps;
    for (std::size_t t = 0; t < n; ++t) {
        if (t == 0) {
            m.root_linear_velocity[t] = (m.root_position[1] - m.root_position[0]) * fps;
            m.root_angular_velocity[t] = w_step[0];
        } else if (t + 1 == n) {
            m.root_linear_velocity[t] = (m.root_position[t] - m.root_position[t - 1]) * fps;
            m.root_angular_velocity[t] = w_step[t - 1];
        } else {
            m.root_linear_velocity[t] = (m.root_position[t + 1] - m.root_position[t - 1]) * (0.5 * fps);
            m.root_angular_velocity[t] = 0.5 * (w_step[t - 1] + w_step[t]);
        }
    }
    return m;
}

} // namespace grk

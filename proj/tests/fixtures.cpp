#include "fixtures.hpp"

#include "grk/kmeans.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>

#ifndef GRK_DATA_DIR
#define GRK_DATA_DIR "data"
#endif

namespace fixtures {

using grk::BvhChannel;
using grk::BvhDocument;
using grk::BvhJoint;
using Eigen::Vector3d;

constexpr double kPi = std::numbers::pi;

std::string data_path(const std::string& name) { return std::string(GRK_DATA_DIR) + "/" + name; }

namespace {

// Body frame (forward, left, up) to BVH (x = left, y = up, z = forward).
Vector3d bvh(double forward, double left, double up) { return {left, up, forward}; }

BvhJoint joint(const std::string& name, const Vector3d& offset)
{
    BvhJoint j;
    j.name = name;
    j.offset = offset;
    j.channels = {BvhChannel::Zrotation, BvhChannel::Xrotation, BvhChannel::Yrotation};
    return j;
}

BvhJoint end_site(const std::string& parent, const Vector3d& offset)
{
    BvhJoint j;
    j.name = parent + "_End";
    j.offset = offset;
    j.is_end_site = true;
    return j;
}

BvhJoint leg(const std::string& side, double s)
{
    BvhJoint up = joint(side + "UpLeg", bvh(0, 0.09 * s, -0.05));
    BvhJoint knee = joint(side + "Leg", bvh(0, 0, -0.42));
    BvhJoint foot = joint(side + "Foot", bvh(0, 0, -0.42));
    BvhJoint toe = joint(side + "Toe", bvh(0.13, 0, -0.06));
    toe.children.push_back(end_site(toe.name, bvh(0.05, 0, 0)));
    foot.children.push_back(std::move(toe));
    knee.children.push_back(std::move(foot));
    up.children.push_back(std::move(knee));
    return up;
}

BvhJoint arm(const std::string& side, double s)
{
    BvhJoint clav = joint(side + "Shoulder", bvh(0, 0.04 * s, 0.20));
    BvhJoint upper = joint(side + "Arm", bvh(0, 0.14 * s, 0));
    BvhJoint fore = joint(side + "ForeArm", bvh(0, 0, -0.28));
    // Forearms point forward at rest, like the robot's.
    BvhJoint hand = joint(side + "Hand", bvh(0.25, 0, 0));
    hand.children.push_back(end_site(hand.name, bvh(0.08, 0, 0)));
    fore.children.push_back(std::move(hand));
    upper.children.push_back(std::move(fore));
    clav.children.push_back(std::move(upper));
    return clav;
}

// Column of a named joint's channel in the frame matrix.
struct Columns {
    std::map<std::string, std::size_t> first;

    explicit Columns(const BvhDocument& doc)
    {
        for (const auto& fj : grk::flatten(doc)) first[fj.joint->name] = fj.first_channel;
    }
    // Joints use Z X Y; the root has three position channels first.
    std::size_t rot(const std::string& name, char axis) const
    {
        const std::size_t base = first.at(name) + (name == "Hips" ? 3 : 0);
        return base + (axis == 'z' ? 0 : axis == 'x' ? 1 : 2);
    }
};

double smoothstep(double x)
{
    x = std::clamp(x, 0.0, 1.0);
    return x * x * (3.0 - 2.0 * x);
}

// Forearm X rotation that lets the arm hang straight.
constexpr double kElbowStraight = kPi / 2;

constexpr double kThigh = 0.42, kShin = 0.42;

// Sagittal two-link IK. Angles are forward rotations from straight down.
struct LegAngles {
    double hip = 0.0, knee = 0.0, ankle = 0.0; // BVH X rotations
};

LegAngles solve_leg(double hip_fwd, double hip_up, double ankle_fwd, double ankle_up)
{
    const double dz = ankle_fwd - hip_fwd, dy = ankle_up - hip_up;
    const double d = std::min(std::hypot(dz, dy), (kThigh + kShin) * 0.9999);
    const double gamma = std::atan2(dz, -dy);
    const double beta = std::acos(std::clamp((kThigh * kThigh + d * d - kShin * kShin) / (2.0 * kThigh * d), -1.0, 1.0));
    const double knee_inner = std::acos(std::clamp((kThigh * kThigh + kShin * kShin - d * d) / (2.0 * kThigh * kShin), -1.0, 1.0));
    LegAngles a;
    // A positive X rotation swings a hanging limb backwards.
    a.hip = -(gamma + beta);
    a.knee = kPi - knee_inner;
    a.ankle = -(a.hip + a.knee); // keep the foot level
    return a;
}

} // namespace

BvhDocument human_skeleton()
{
    BvhDocument doc;
    doc.unit_scale = 0.01;
    BvhJoint& hips = doc.root;
    hips.name = "Hips";
    hips.offset = Vector3d::Zero();
    hips.channels = {BvhChannel::Xposition, BvhChannel::Yposition, BvhChannel::Zposition,
                     BvhChannel::Zrotation, BvhChannel::Xrotation, BvhChannel::Yrotation};
    BvhJoint spine = joint("Spine", bvh(0, 0, 0.10));
    BvhJoint chest = joint("Chest", bvh(0, 0, 0.15));
    BvhJoint neck = joint("Neck", bvh(0, 0, 0.25));
    BvhJoint head = joint("Head", bvh(0, 0, 0.12));
    head.children.push_back(end_site(head.name, bvh(0, 0, 0.12)));
    neck.children.push_back(std::move(head));
    chest.children.push_back(std::move(neck));
    chest.children.push_back(arm("Left", 1.0));
    chest.children.push_back(arm("Right", -1.0));
    spine.children.push_back(std::move(chest));
    hips.children.push_back(std::move(spine));
    hips.children.push_back(leg("Left", 1.0));
    hips.children.push_back(leg("Right", -1.0));
    doc.frames.resize(0, static_cast<Eigen::Index>(doc.total_channels()));
    return doc;
}

BvhDocument walking_clip(std::size_t frames, double fps)
{
    BvhDocument doc = human_skeleton();
    doc.frame_time = 1.0 / fps;
    doc.frames = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(doc.total_channels()));
    const Columns col(doc);

    const double cycle = 1.1, stride = 0.7; // one left + one right step
    const double v = stride / cycle, stance = 0.6, lift = 0.06, ankle_height = 0.06;
    for (std::size_t f = 0; f < frames; ++f) {
        const auto r = static_cast<Eigen::Index>(f);
        const double t = static_cast<double>(f) / fps;
        const double root_fwd = v * t;
        const double root_up = 0.885 + 0.01 * std::cos(2.0 * 2.0 * kPi * t / cycle);
        const Vector3d root = bvh(root_fwd, 0, root_up);
        for (int k = 0; k < 3; ++k) doc.frames(r, k) = root[k];

        for (const auto& [side, offset] : {std::pair<std::string, double>{"Left", 0.0}, {"Right", 0.5}}) {
            const double phase_count = t / cycle + offset;
            const double k = std::floor(phase_count);
            const double phi = phase_count - k;
            const double plant = v * ((k - offset) * cycle + 0.5 * stance * cycle);
            double fwd = plant, up = ankle_height;
            if (phi >= stance) {
                const double s = (phi - stance) / (1.0 - stance);
                fwd = plant + stride * smoothstep(s);
                up += lift * std::sin(kPi * s);
            }
            const LegAngles a = solve_leg(root_fwd, root_up - 0.05, fwd, up);
            doc.frames(r, static_cast<Eigen::Index>(col.rot(side + "UpLeg", 'x'))) = a.hip;
            doc.frames(r, static_cast<Eigen::Index>(col.rot(side + "Leg", 'x'))) = a.knee;
            doc.frames(r, static_cast<Eigen::Index>(col.rot(side + "Foot", 'x'))) = a.ankle;
        }
        // Counter-swinging arms and a little torso twist.
        const double swing = std::sin(2.0 * kPi * t / cycle);
        doc.frames(r, static_cast<Eigen::Index>(col.rot("LeftArm", 'x'))) = 0.35 * swing;
        doc.frames(r, static_cast<Eigen::Index>(col.rot("RightArm", 'x'))) = -0.35 * swing;
        doc.frames(r, static_cast<Eigen::Index>(col.rot("LeftForeArm", 'x'))) = kElbowStraight - 0.3 - 0.1 * swing;
        doc.frames(r, static_cast<Eigen::Index>(col.rot("RightForeArm", 'x'))) = kElbowStraight - 0.3 + 0.1 * swing;
        doc.frames(r, static_cast<Eigen::Index>(col.rot("LeftArm", 'z'))) = -0.12;
        doc.frames(r, static_cast<Eigen::Index>(col.rot("RightArm", 'z'))) = 0.12;
        doc.frames(r, static_cast<Eigen::Index>(col.rot("Chest", 'y'))) = 0.08 * swing;
    }
    return doc;
}

std::vector<Syllable> speech_script(double seconds, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * grk::uniform01(rng); };
    std::vector<Syllable> out;
    double t = u(0.1, 0.4);
    while (t < seconds - 0.2) {
        // An utterance of a few syllables, then a pause.
        const int count = 3 + static_cast<int>(u(0.0, 6.0));
        const double base_f0 = u(110.0, 170.0);
        for (int i = 0; i < count && t < seconds - 0.2; ++i) {
            Syllable s;
            s.start = t;
            s.duration = u(0.12, 0.28);
            s.f0 = base_f0 * (1.0 + 0.15 * std::sin(0.9 * i) + u(-0.05, 0.05));
            s.loudness = u(0.5, 1.0);
            out.push_back(s);
            t += s.duration + u(0.03, 0.08);
        }
        t += u(0.3, 0.9);
    }
    return out;
}

double speech_envelope(const std::vector<Syllable>& script, double t)
{
    double e = 0.0;
    for (const auto& s : script) {
        // Half-second attack/release around each syllable.
        const double lo = s.start - 0.25, hi = s.start + s.duration + 0.25;
        if (t < lo || t > hi) continue;
        const double w = std::min({1.0, (t - lo) / 0.25, (hi - t) / 0.25});
        e = std::max(e, s.loudness * smoothstep(w));
    }
    return e;
}

grk::AudioBuffer speech_wav(double seconds, double sample_rate, std::uint64_t seed)
{
    const auto script = speech_script(seconds, seed);
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    grk::AudioBuffer audio;
    audio.sample_rate = sample_rate;
    audio.samples.assign(static_cast<std::size_t>(seconds * sample_rate), 0.0);
    for (const auto& s : script) {
        const auto a = static_cast<std::size_t>(s.start * sample_rate);
        const auto b = std::min(audio.samples.size(), static_cast<std::size_t>((s.start + s.duration) * sample_rate));
        double phase = 0.0;
        for (std::size_t i = a; i < b; ++i) {
            const double x = static_cast<double>(i - a) / static_cast<double>(b - a);
            const double env = s.loudness * std::sin(kPi * x) * std::sin(kPi * x);
            const double f0 = s.f0 * (1.0 + 0.08 * (0.5 - x)); // falling pitch
            phase += 2.0 * kPi * f0 / sample_rate;
            double v = 0.0;
            for (int h = 1; h <= 12; ++h) {
                const double fh = f0 * h;
                // Two broad formant bumps.
                const double g = std::exp(-std::pow((fh - 600.0) / 300.0, 2.0)) +
                                 0.6 * std::exp(-std::pow((fh - 1700.0) / 500.0, 2.0)) + 0.05;
                v += g * std::sin(h * phase) / h;
            }
            const double noise = grk::uniform01(rng) * 2.0 - 1.0;
            audio.samples[i] += 0.25 * env * v + 0.02 * env * noise;
        }
    }
    for (auto& v : audio.samples) v = std::clamp(v, -1.0, 1.0);
    return audio;
}

BvhDocument gesture_clip(double seconds, double fps, std::uint64_t seed)
{
    BvhDocument doc = human_skeleton();
    doc.frame_time = 1.0 / fps;
    const auto frames = static_cast<std::size_t>(std::floor(seconds * fps));
    doc.frames = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(doc.total_channels()));
    const Columns col(doc);
    const auto script = speech_script(seconds, seed);
    std::mt19937_64 rng(seed * 7919 + 1);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * grk::uniform01(rng); };
    const double f1 = u(0.6, 1.0), f2 = u(1.3, 2.0), f3 = u(0.15, 0.3);
    const double p1 = u(0, 2 * kPi), p2 = u(0, 2 * kPi), p3 = u(0, 2 * kPi);

    auto set = [&](Eigen::Index r, const std::string& name, char axis, double v) {
        doc.frames(r, static_cast<Eigen::Index>(col.rot(name, axis))) = v;
    };
    for (std::size_t f = 0; f < frames; ++f) {
        const auto r = static_cast<Eigen::Index>(f);
        const double t = static_cast<double>(f) / fps;
        const double e = speech_envelope(script, t);
        const double a = std::sin(2 * kPi * f1 * t + p1), b = std::sin(2 * kPi * f2 * t + p2);
        const double slow = std::sin(2 * kPi * f3 * t + p3);
        const Vector3d root = bvh(0.0, 0.01 * slow, 0.95);
        for (int k = 0; k < 3; ++k) doc.frames(r, k) = root[k];
        set(r, "Hips", 'y', 0.05 * slow);
        set(r, "Chest", 'x', -0.05 * e - 0.03 * b * e);
        set(r, "Chest", 'y', 0.06 * slow + 0.04 * a * e);
        set(r, "Neck", 'x', -0.1 * e * b);
        set(r, "Head", 'y', 0.15 * slow);
        for (const auto& [side, s] : {std::pair<std::string, double>{"Left", 1.0}, {"Right", -1.0}}) {
            const double side_a = s > 0 ? a : std::sin(2 * kPi * f1 * t + p1 + 0.8);
            set(r, side + "Arm", 'z', -s * (0.15 + 0.35 * e + 0.1 * e * b));
            set(r, side + "Arm", 'x', -(0.2 + 0.6 * e + 0.25 * e * side_a));
            set(r, side + "ForeArm", 'x', kElbowStraight - (0.4 + 0.7 * e + 0.3 * e * b));
            set(r, side + "Hand", 'y', s * 0.3 * e * side_a);
            set(r, side + "Hand", 'x', 0.2 * e * b);
        }
    }
    return doc;
}

BvhDocument crouch_clip(std::size_t frames, double fps)
{
    BvhDocument doc = human_skeleton();
    doc.frame_time = 1.0 / fps;
    doc.frames = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(doc.total_channels()));
    const Columns col(doc);
    for (std::size_t f = 0; f < frames; ++f) {
        const auto r = static_cast<Eigen::Index>(f);
        const double t = static_cast<double>(f) / static_cast<double>(frames - 1);
        const double drop = 0.15 * std::sin(kPi * t);
        const Vector3d root = bvh(0.0, 0.0, 0.95 - drop);
        for (int k = 0; k < 3; ++k) doc.frames(r, k) = root[k];
        doc.frames(r, static_cast<Eigen::Index>(col.rot("Chest", 'x'))) = -0.3 * std::sin(kPi * t);
        doc.frames(r, static_cast<Eigen::Index>(col.rot("LeftArm", 'x'))) = -0.8 * std::sin(kPi * t);
        doc.frames(r, static_cast<Eigen::Index>(col.rot("RightArm", 'x'))) = -0.8 * std::sin(kPi * t);
    }
    return doc;
}

BvhDocument emblem_clip(const std::string& kind, std::size_t frames, double fps)
{
    BvhDocument doc = human_skeleton();
    doc.frame_time = 1.0 / fps;
    doc.frames = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(doc.total_channels()));
    const Columns col(doc);
    auto set = [&](Eigen::Index r, const std::string& name, char axis, double v) {
        doc.frames(r, static_cast<Eigen::Index>(col.rot(name, axis))) = v;
    };
    for (std::size_t f = 0; f < frames; ++f) {
        const auto r = static_cast<Eigen::Index>(f);
        const double t = static_cast<double>(f) / static_cast<double>(frames - 1);
        const double rise = std::sin(kPi * t); // prepare, stroke at the middle, retract
        const Vector3d root = bvh(0.0, 0.0, 0.95);
        for (int k = 0; k < 3; ++k) doc.frames(r, k) = root[k];
        set(r, "LeftArm", 'z', -0.15);
        set(r, "RightArm", 'z', 0.15);
        set(r, "LeftForeArm", 'x', kElbowStraight - 0.4);
        set(r, "RightForeArm", 'x', kElbowStraight - 0.4);
        if (kind == "wave") {
            set(r, "RightArm", 'z', 0.15 + 1.2 * rise);
            set(r, "RightForeArm", 'x', kElbowStraight - 0.4 - 1.0 * rise);
            set(r, "RightForeArm", 'z', 0.4 * rise * std::sin(6.0 * kPi * t));
        } else if (kind == "point") {
            set(r, "RightArm", 'x', -1.3 * rise);
            set(r, "RightForeArm", 'x', kElbowStraight - 0.4 + 0.35 * rise);
            set(r, "Chest", 'y', -0.15 * rise);
        } else if (kind == "wide") {
            set(r, "LeftArm", 'z', -0.15 - 0.9 * rise);
            set(r, "RightArm", 'z', 0.15 + 0.9 * rise);
            set(r, "LeftArm", 'x', -0.5 * rise);
            set(r, "RightArm", 'x', -0.5 * rise);
        } else {
            throw std::invalid_argument("unknown emblem " + kind);
        }
    }
    return doc;
}

grk::Correspondence human_to_g1()
{
    grk::Correspondence c;
    auto add = [&](const char* h, const char* r, double wp, double wo, bool ee) { c.pairs.push_back({h, r, wp, wo, ee}); };
    add("Hips", "pelvis", 1.0, 1.0, false);
    add("Chest", "waist_pitch_joint", 0.5, 1.0, false);
    add("Head", "head", 0.5, 0.5, true);
    add("LeftLeg", "left_knee_joint", 1.0, 0.0, false);
    add("RightLeg", "right_knee_joint", 1.0, 0.0, false);
    add("LeftFoot", "left_ankle_roll_joint", 1.0, 1.0, true);
    add("RightFoot", "right_ankle_roll_joint", 1.0, 1.0, true);
    add("LeftForeArm", "left_elbow_joint", 1.0, 0.0, false);
    add("RightForeArm", "right_elbow_joint", 1.0, 0.0, false);
    add("LeftHand", "left_wrist_yaw_joint", 1.0, 0.5, true);
    add("RightHand", "right_wrist_yaw_joint", 1.0, 0.5, true);
    return c;
}

grk::Correspondence self_correspondence(const BvhDocument& doc)
{
    grk::Correspondence c;
    for (const auto& fj : grk::flatten(doc)) {
        if (fj.joint->is_end_site) continue;
        const std::string& n = fj.joint->name;
        const bool ee = n.find("Hand") != std::string::npos || n.find("Toe") != std::string::npos || n == "Head";
        c.pairs.push_back({n, n, 1.0, 1.0, ee});
    }
    return c;
}

grk::RobotMotion g1_gesture_motion(const grk::KinematicTree& g1, double seconds, double fps, std::uint64_t seed)
{
    const auto frames = static_cast<std::size_t>(std::floor(seconds * fps));
    grk::RobotMotion m = grk::make_motion(g1, fps, frames);
    const auto script = speech_script(seconds, seed);
    std::mt19937_64 rng(seed + 17);
    auto u = [&](double lo, double hi) { return lo + (hi - lo) * grk::uniform01(rng); };

    // Four latent rhythms mixed into the joints by a fixed random matrix.
    constexpr int kLatent = 4;
    double freq[kLatent], phase[kLatent];
    for (int i = 0; i < kLatent; ++i) {
        freq[i] = u(0.2, 1.6);
        phase[i] = u(0.0, 2 * kPi);
    }
    const auto names = g1.dof_names();
    const auto n = static_cast<Eigen::Index>(names.size());
    Eigen::MatrixXd mix(n, kLatent);
    Eigen::VectorXd rest(n), gain(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto& name = names[static_cast<std::size_t>(j)];
        const bool arm = name.find("shoulder") != std::string::npos || name.find("elbow") != std::string::npos ||
                         name.find("wrist") != std::string::npos;
        for (int i = 0; i < kLatent; ++i) mix(j, i) = u(-1.0, 1.0);
        mix.row(j) /= mix.row(j).cwiseAbs().sum();
        gain[j] = arm ? 0.45 : 0.08;
        rest[j] = 0.0;
        if (name.find("elbow") != std::string::npos) rest[j] = 0.9;
        if (name.find("knee") != std::string::npos) rest[j] = 0.1;
        if (name.find("shoulder_roll") != std::string::npos) rest[j] = name[0] == 'l' ? 0.2 : -0.2;
    }
    const Eigen::VectorXd lo = g1.lower_limits(), hi = g1.upper_limits();
    for (std::size_t f = 0; f < frames; ++f) {
        const double t = static_cast<double>(f) / fps;
        const double e = 0.3 + 0.7 * speech_envelope(script, t);
        Eigen::Matrix<double, kLatent, 1> z;
        for (int i = 0; i < kLatent; ++i) z[i] = std::sin(2 * kPi * freq[i] * t + phase[i]);
        Eigen::VectorXd q = rest + e * gain.cwiseProduct(mix * z);
        m.joint_angles.row(static_cast<Eigen::Index>(f)) = q.cwiseMax(lo).cwiseMin(hi).transpose();
        m.root_position[f] = Vector3d(0.0, 0.0, 0.79 + 0.005 * z[0]);
    }
    return grk::compute_root_velocities(std::move(m));
}

} // namespace fixtures

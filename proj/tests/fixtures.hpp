#pragma once

// Synthetic fixtures shared by the tests and tools/make_fixtures.

#include "grk/bvh.hpp"
#include "grk/kinematics.hpp"
#include "grk/retarget.hpp"
#include "grk/robot_motion.hpp"
#include "grk/wav.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fixtures {

std::string data_path(const std::string& name);

// Humanoid BVH skeleton (centimeters, Y up, facing +Z) without frames.
grk::BvhDocument human_skeleton();

// Straight-line walk with planted feet solved by two-link leg IK.
grk::BvhDocument walking_clip(std::size_t frames = 120, double fps = 30.0);

// Standing talker whose arm activity follows the speech envelope of `seed`.
grk::BvhDocument gesture_clip(double seconds, double fps, std::uint64_t seed);

// Straight-legged crouch that pushes the feet below the ground.
grk::BvhDocument crouch_clip(std::size_t frames = 90, double fps = 30.0);

// Short emblematic gesture ("wave", "point" or "wide") with its stroke at the middle frame.
grk::BvhDocument emblem_clip(const std::string& kind, std::size_t frames = 45, double fps = 30.0);

// Human key bodies to G1 bodies.
grk::Correspondence human_to_g1();

// Every non end-site BVH joint to itself; hands, feet and head are end effectors.
grk::Correspondence self_correspondence(const grk::BvhDocument& doc);

struct Syllable {
    double start = 0.0;
    double duration = 0.0;
    double f0 = 0.0;
    double loudness = 0.0;
};

std::vector<Syllable> speech_script(double seconds, std::uint64_t seed);
// Smooth activity in [0, 1] at time t, zero between utterances.
double speech_envelope(const std::vector<Syllable>& script, double t);
grk::AudioBuffer speech_wav(double seconds, double sample_rate, std::uint64_t seed);

// Joint-space gesture motion for the G1 with a few shared latent rhythms.
grk::RobotMotion g1_gesture_motion(const grk::KinematicTree& g1, double seconds, double fps, std::uint64_t seed);

} // namespace fixtures

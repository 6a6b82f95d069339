#pragma once

// Biovision Hierarchy (BVH) motion capture documents.
//
// Offsets and position channels are held in meters, rotation channels in
// radians. The document remembers the length unit it was read with so that
// write_bvh() can emit the original units again.

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace grk {

enum class BvhChannel { Xposition, Yposition, Zposition, Xrotation, Yrotation, Zrotation };

std::string_view to_string(BvhChannel c);
bool is_rotation(BvhChannel c);
// 0, 1, 2 for X, Y, Z.
int channel_axis(BvhChannel c);

struct BvhJoint {
    std::string name;
    Eigen::Vector3d offset = Eigen::Vector3d::Zero();
    std::vector<BvhChannel> channels;
    std::vector<BvhJoint> children;
    bool is_end_site = false;
};

struct BvhDocument {
    BvhJoint root;
    double frame_time = 1.0 / 30.0;
    // frame_count x total_channels, depth-first declaration order.
    Eigen::MatrixXd frames;
    // Meters per file length unit (1.0 for meters, 0.01 for centimeters).
    double unit_scale = 1.0;

    std::size_t frame_count() const { return static_cast<std::size_t>(frames.rows()); }
    std::size_t total_channels() const;
};

struct BvhReadOptions {
    // Forces the length unit. When unset, files whose rest skeleton is taller
    // than 10 units are read as centimeters.
    std::optional<double> unit_scale;
};

BvhDocument parse_bvh(std::string_view text, const BvhReadOptions& options = {});
std::string write_bvh(const BvhDocument& doc);

// Throws a data error if any structural invariant is violated.
void validate(const BvhDocument& doc);

// Depth-first list of joints (end sites included) with their first channel
// column in the frame matrix.
struct FlatJoint {
    const BvhJoint* joint;
    int parent; // -1 for the root
    std::size_t first_channel;
};
std::vector<FlatJoint> flatten(const BvhDocument& doc);

} // namespace grk

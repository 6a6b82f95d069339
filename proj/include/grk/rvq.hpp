#pragma once

// Residual vector quantization of windowed motion features.
//
// A feature frame is `window` consecutive motion frames of one body part's
// channels, z-normalized per dimension. Layer l quantizes what layers < l left
// over; the reconstruction is the sum of the selected codes.

#include "grk/robot_motion.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grk {

// Audio marks the single-layer codebooks used to discretize audio features.
enum class BodyPart : std::uint32_t { Body = 0, Hand = 1, Combined = 2, Audio = 3 };

std::string_view to_string(BodyPart part);
BodyPart parse_body_part(std::string_view name);

// Channel names (from the RobotMotion file layout) modeled by a part. The body
// takes legs, waist and root height; the hand takes shoulders through wrists.
std::vector<std::string> part_channels(const std::vector<std::string>& joint_names, BodyPart part);

// frames x channels matrix of the named channels.
Eigen::MatrixXd select_channels(const RobotMotion& motion, const std::vector<std::string>& channels);

struct Normalization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale; // > 0
};

// Stacks `window` consecutive rows: (frames - window + 1) x (window * channels).
Eigen::MatrixXd window_frames(const Eigen::MatrixXd& channels, std::size_t window);
// Overlap-average inverse of window_frames.
Eigen::MatrixXd unwindow_frames(const Eigen::MatrixXd& features, std::size_t window,
                                std::size_t channels);

Normalization fit_normalization(const Eigen::MatrixXd& features);
Eigen::MatrixXd normalize(const Eigen::MatrixXd& features, const Normalization& norm);
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& features, const Normalization& norm);

struct Codebook {
    Eigen::MatrixXd codes; // K x D
    std::vector<std::uint64_t> usage_counts;

    std::size_t size() const { return static_cast<std::size_t>(codes.rows()); }
};

struct RvqModel {
    BodyPart part = BodyPart::Body;
    std::size_t window = 1;
    std::vector<std::string> channels;
    Normalization normalization;
    std::vector<Codebook> layers;

    std::size_t dim() const { return static_cast<std::size_t>(normalization.mean.size()); }
    std::size_t layer_count() const { return layers.size(); }
    std::size_t codes_per_layer() const { return layers.empty() ? 0 : layers.front().size(); }
};

void validate(const RvqModel& model);

struct TokenStack {
    BodyPart part = BodyPart::Body;
    Eigen::MatrixXi tokens; // frames x layers

    std::size_t frame_count() const { return static_cast<std::size_t>(tokens.rows()); }
    std::size_t layer_count() const { return static_cast<std::size_t>(tokens.cols()); }
};

// Normalized feature frames of a motion for the model's part and window.
Eigen::MatrixXd frame_features(const RvqModel& model, const RobotMotion& motion);
Eigen::MatrixXd frame_features(const RobotMotion& motion, const std::vector<std::string>& channels,
                               std::size_t window, const Normalization& norm);

struct RvqTrainOptions {
    std::size_t layers = 4;
    std::size_t codes = 256;
    std::uint64_t seed = 0;
    int max_iterations = 50;
};

// Trains on already normalized feature rows.
std::vector<Codebook> train_codebooks(const Eigen::MatrixXd& features, const RvqTrainOptions& options);

// Fits normalization on the framed corpus, then trains the codebooks.
RvqModel train_rvq(const std::vector<RobotMotion>& corpus, BodyPart part, std::size_t window,
                   const RvqTrainOptions& options);

// Greedy residual assignment, lowest index on ties.
TokenStack encode(const RvqModel& model, const Eigen::MatrixXd& features);
// Sum of the indexed codes in the normalized feature space.
Eigen::MatrixXd decode_latent(const RvqModel& model, const TokenStack& stack);
// Latent decode, denormalize and overlap-average back to per-frame channels.
Eigen::MatrixXd decode_channels(const RvqModel& model, const TokenStack& stack);

// MSE in the normalized feature space after layers 1..l, for l = 1..L.
std::vector<double> reconstruction_error(const RvqModel& model, const Eigen::MatrixXd& features);

// Rebuilds a RobotMotion from decoded body and hand channels. Channels
// not covered by any model stay zero; root x/y stay at the origin and the root
// orientation at identity.
RobotMotion motion_from_channels(const std::vector<std::string>& joint_names, double frame_rate,
                                 const std::vector<std::pair<std::vector<std::string>, Eigen::MatrixXd>>& parts);

// Binary model file: "RVQ1", u32 L, K, D, window, f64 mean[D], f64 scale[D],
// f64 codes (layer-major, row-major), then a trailer with the part, channel
// names and usage counts. All little-endian.
std::vector<std::uint8_t> serialize_rvq(const RvqModel& model);
RvqModel deserialize_rvq(std::span<const std::uint8_t> bytes);
void save_rvq(const RvqModel& model, const std::string& path);
RvqModel load_rvq(const std::string& path);

// Token text: optional `# part <name>` header, then one line of L indices per frame.
std::string write_tokens(const TokenStack& stack);
TokenStack parse_tokens(std::string_view text);
TokenStack load_tokens(const std::string& path);

// Column-wise concatenation / split of per-part stacks.
TokenStack concat_parts(const TokenStack& body, const TokenStack& hand);
std::pair<TokenStack, TokenStack> split_parts(const TokenStack& combined, std::size_t body_layers);

} // namespace grk

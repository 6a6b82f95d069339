#pragma once

// Frame-aligned audio conditioning features: MFCC, delta, chromagram, onset
// strength and an autocorrelation tempogram.

#include "grk/config.hpp"
#include "grk/rvq.hpp"
#include "grk/wav.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

namespace grk {

struct FeatureConfig {
    double sample_rate = 24000.0;
    std::size_t fft_size = 2048;
    std::size_t hop = 800; // 30 frames per second at 24 kHz
    std::size_t mel_bands = 40;
    std::size_t mfcc_count = 13;
    std::size_t chroma_bins = 12;
    std::size_t tempogram_window = 32;

    double frame_rate() const { return sample_rate / static_cast<double>(hop); }
};

FeatureConfig feature_config_from(const KeyValueConfig& cfg);
void validate(const FeatureConfig& config);

struct FeatureMatrix {
    std::vector<std::string> column_names;
    double frame_rate = 30.0;
    Eigen::MatrixXd values; // frames x columns

    std::size_t frame_count() const { return static_cast<std::size_t>(values.rows()); }
};

// Hann-windowed |DFT|^2, frame t covering samples [t*hop, t*hop + fft_size).
// frames x (fft_size/2 + 1).
Eigen::MatrixXd power_spectrogram(const AudioBuffer& audio, const FeatureConfig& config);

double hz_to_mel(double hz);
double mel_to_hz(double mel);
// mel_bands x (fft_size/2 + 1) triangular filters on the HTK mel scale.
Eigen::MatrixXd mel_filterbank(const FeatureConfig& config);

inline constexpr double kLogFloor = 1e-10;

Eigen::MatrixXd mfcc(const Eigen::MatrixXd& spectrogram, const FeatureConfig& config);
// Regression delta with N = 2 and replicated edge frames.
Eigen::MatrixXd delta(const Eigen::MatrixXd& features);
Eigen::MatrixXd chromagram(const Eigen::MatrixXd& spectrogram, const FeatureConfig& config);
// Pitch class (0 = C) of an FFT bin frequency.
int pitch_class(double hz);
Eigen::VectorXd onset_strength(const Eigen::MatrixXd& spectrogram);
// frames x tempogram_window: autocorrelation at lags 1..W of the onset
// envelope inside the centered window [t-W, t+W] (mean removed, zero padded),
// divided by the lag-0 value.
Eigen::MatrixXd tempogram(const Eigen::VectorXd& onset, const FeatureConfig& config);

FeatureMatrix stack_features(const AudioBuffer& audio, const FeatureConfig& config);

std::string write_features(const FeatureMatrix& features);
FeatureMatrix parse_features(std::string_view text);
FeatureMatrix load_features(const std::string& path);

struct AudioTokens {
    std::vector<int> tokens;
    RvqModel codebook; // single layer, window 1, part Audio
};

// k-means over z-normalized feature rows.
AudioTokens quantize_audio(const FeatureMatrix& features, std::size_t codes, std::uint64_t seed);
std::vector<int> assign_audio_tokens(const RvqModel& codebook, const FeatureMatrix& features);

std::string write_audio_tokens(const std::vector<int>& tokens);
std::vector<int> parse_audio_tokens(std::string_view text);

} // namespace grk

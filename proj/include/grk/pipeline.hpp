#pragma once

// Offline inference path: audio features -> audio tokens -> sampled motion
// tokens (optionally spliced with a retrieved semantic gesture) -> decoded
// reference motion -> PD targets, plus a metrics report and a run manifest.

#include "grk/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace grk {

inline constexpr const char* kVersion = "0.1.0";

struct PipelineConfig {
    std::filesystem::path robot;
    std::filesystem::path correspondence;
    std::filesystem::path retarget_config;
    std::filesystem::path rvq_body;
    std::filesystem::path rvq_hand;
    std::filesystem::path ngram;
    std::filesystem::path audio_codebook;
    std::filesystem::path gesture_library; // optional
    std::filesystem::path feature_config;
    std::filesystem::path scales;          // optional
    std::uint64_t seed = 0;
    double temperature = 1.0;
    std::size_t crossfade = 4;
    // Training hyperparameters used with --train.
    std::size_t rvq_layers = 4;
    std::size_t rvq_codes = 64;
    std::size_t rvq_window = 4;
    std::size_t audio_codes = 16;
    std::size_t ngram_order = 2;
    double ngram_alpha = 0.1;
    std::string source_text; // raw config text, hashed into the manifest
};

// Relative paths are resolved against the config file's directory. The
// GRK_SEED environment variable overrides `seed`.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PipelineOptions {
    std::optional<std::string> keywords;   // triggers semantic gesture splicing
    std::optional<std::size_t> splice_at;  // defaults to the middle frame
    // Corpus manifest (`bvh_path wav_path` per line) to fit all models first.
    std::optional<std::filesystem::path> train_corpus;
};

struct PipelineResult {
    std::size_t audio_frames = 0;
    std::size_t motion_frames = 0;
    bool spliced = false;
    std::size_t splice_begin = 0;
    std::size_t splice_end = 0;
    std::vector<std::filesystem::path> outputs;
};

PipelineResult run_pipeline(PipelineConfig config, const std::filesystem::path& wav,
                            const std::filesystem::path& out_dir, const PipelineOptions& options);

// Fits the RVQ, audio codebook and n-gram models from a paired corpus and
// points `config` at the written model files in `model_dir`.
void train_pipeline_models(PipelineConfig& config, const std::filesystem::path& corpus_manifest,
                           const std::filesystem::path& model_dir);

// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(std::string_view data);

} // namespace grk

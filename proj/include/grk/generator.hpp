#pragma once

// Count-based conditional autoregressive model over motion super-tokens
// (one frame's full token tuple) given audio tokens, plus keyword retrieval
// of semantic gesture clips and their latent-space splicing.

#include "grk/rvq.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace grk {

// Interned token tuples. Id 0 is reserved for tuples never seen in training.
class Vocabulary {
public:
    static constexpr int kUnknown = 0;

    Vocabulary();
    int intern(const std::vector<int>& tuple);
    int lookup(const std::vector<int>& tuple) const;
    const std::vector<int>& tuple(int id) const { return tuples_[static_cast<std::size_t>(id)]; }
    std::size_t size() const { return tuples_.size(); }

private:
    std::vector<std::vector<int>> tuples_;
    std::map<std::vector<int>, int> ids_;
};

// Context padding before the first frame.
inline constexpr int kStartToken = -1;
// Audio slot of backoff contexts that ignore the audio token.
inline constexpr int kAnyAudio = -2;

class NgramModel {
public:
    NgramModel() = default;
    NgramModel(std::size_t order, double alpha, std::size_t tuple_width);

    std::size_t order() const { return order_; }
    double alpha() const { return alpha_; }
    std::size_t tuple_width() const { return tuple_width_; }
    const Vocabulary& vocabulary() const { return vocab_; }
    Vocabulary& vocabulary() { return vocab_; }

    void add(int audio_token, std::span<const int> context, int next);

    // Smoothed P(. | audio, context) over the vocabulary, taken from the most
    // specific observed level: (audio, context), (any audio, context), then
    // the unigram level; uniform when nothing was observed.
    std::vector<double> distribution(int audio_token, std::span<const int> context) const;
    bool observed(int audio_token, std::span<const int> context) const;

    using Key = std::vector<int>; // audio slot followed by the context
    const std::map<Key, std::map<int, std::uint64_t>>& counts() const { return counts_; }
    std::map<Key, std::map<int, std::uint64_t>>& counts() { return counts_; }

private:
    std::vector<double> smoothed(const std::map<int, std::uint64_t>& row) const;

    std::size_t order_ = 2;
    double alpha_ = 0.1;
    std::size_t tuple_width_ = 0;
    Vocabulary vocab_;
    std::map<Key, std::map<int, std::uint64_t>> counts_;
};

// Super-token id sequence of a stack; unseen tuples map to kUnknown.
std::vector<int> to_super_tokens(const NgramModel& model, const TokenStack& stack);

NgramModel train_ngram(const std::vector<TokenStack>& motion_tokens,
                       const std::vector<std::vector<int>>& audio_tokens, std::size_t order,
                       double alpha);

double perplexity(const NgramModel& model, const TokenStack& motion_tokens,
                  const std::vector<int>& audio_tokens);

struct GenerationConfig {
    double temperature = 1.0; // below 1e-6 sampling becomes argmax
    std::uint64_t seed = 0;
    std::size_t max_frames = 0; // 0: as many frames as audio tokens
    std::size_t splice_crossfade = 4;
};

TokenStack sample_sequence(const NgramModel& model, const std::vector<int>& audio_tokens,
                           const GenerationConfig& config, BodyPart part = BodyPart::Combined);

std::string write_ngram(const NgramModel& model);
NgramModel parse_ngram(std::string_view text);
NgramModel load_ngram(const std::string& path);

struct GestureEntry {
    std::set<std::string> keywords;
    TokenStack clip;
    std::size_t stroke_frame = 0;
    std::string clip_path;
};

struct GestureLibrary {
    std::vector<GestureEntry> entries;
};

// Manifest lines `kw1,kw2 | clip_token_file | stroke_frame`; clip paths are
// resolved against `base_dir`.
GestureLibrary parse_gesture_library(std::string_view text, const std::filesystem::path& base_dir);
GestureLibrary load_gesture_library(const std::string& path);

// Lowercased words of free text, split on anything that is not alphanumeric.
std::set<std::string> keywords_from_text(std::string_view text);

// Entry maximizing |shared keywords| / |entry keywords|; first entry on ties;
// none without overlap.
std::optional<std::size_t> retrieve_gesture(const GestureLibrary& library,
                                            const std::set<std::string>& keywords);

// Concatenated latent (summed code vectors) of a stack whose columns are the
// layers of `models` in order.
Eigen::MatrixXd stack_latent(const TokenStack& stack, std::span<const RvqModel* const> models);

// Places the clip so its stroke frame lands on `at_frame`, crossfades the
// latent trajectories linearly over `crossfade` frames inside both clip
// boundaries and re-encodes frames whose latent changed.
TokenStack splice_semantic_gesture(const TokenStack& generated, const GestureEntry& clip,
                                   std::size_t at_frame, std::size_t crossfade,
                                   std::span<const RvqModel* const> models);

} // namespace grk

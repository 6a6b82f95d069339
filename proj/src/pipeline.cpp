#include "grk/pipeline.hpp"

#include "grk/audio_features.hpp"
#include "grk/control_map.hpp"
#include "grk/error.hpp"
#include "grk/generator.hpp"
#include "grk/metrics.hpp"
#include "grk/retarget.hpp"
#include "grk/rvq.hpp"
#include "grk/text.hpp"
#include "grk/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace grk {

namespace fs = std::filesystem;

std::string fnv1a_hex(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineConfig load_pipeline_config(const fs::path& path)
{
    PipelineConfig c;
    c.source_text = text::read_file(path);
    const auto kv = KeyValueConfig::parse(c.source_text);
    const fs::path base = path.parent_path();
    auto resolve = [&](const char* key, bool required) -> fs::path {
        auto v = kv.get(key);
        if (!v || v->empty()) {
            if (required) fail_data(path.string() + ": missing required key '" + key + "'");
            return {};
        }
        fs::path p(*v);
        return p.is_absolute() ? p : base / p;
    };
    auto count = [&](const char* key, std::size_t fallback) {
        const auto v = kv.get_int(key, static_cast<long long>(fallback));
        if (v <= 0) fail_data(std::string(key) + " must be positive");
        return static_cast<std::size_t>(v);
    };
    c.robot = resolve("robot", true);
    c.correspondence = resolve("correspondence", false);
    c.retarget_config = resolve("retarget_config", false);
    c.rvq_body = resolve("rvq_body", false);
    c.rvq_hand = resolve("rvq_hand", false);
    c.ngram = resolve("ngram", false);
    c.audio_codebook = resolve("audio_codebook", false);
    c.gesture_library = resolve("gesture_library", false);
    c.feature_config = resolve("feature_config", false);
    c.scales = resolve("scales", false);
    const auto seed = kv.get_int("seed", 0);
    if (seed < 0) fail_data("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(seed);
    if (const char* env = std::getenv("GRK_SEED"); env && *env) {
        const auto s = text::parse_int(env, "GRK_SEED");
        if (s < 0) fail_usage("GRK_SEED must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    }
    c.temperature = kv.get_double("temperature", c.temperature);
    if (!(c.temperature >= 0.0) || !std::isfinite(c.temperature)) fail_data("temperature must be non-negative");
    const auto cf = kv.get_int("crossfade", static_cast<long long>(c.crossfade));
    if (cf < 0) fail_data("crossfade must be non-negative");
    c.crossfade = static_cast<std::size_t>(cf);
    c.rvq_layers = count("rvq_layers", c.rvq_layers);
    c.rvq_codes = count("rvq_codes", c.rvq_codes);
    c.rvq_window = count("rvq_window", c.rvq_window);
    c.audio_codes = count("audio_codes", c.audio_codes);
    const auto order = kv.get_int("ngram_order", static_cast<long long>(c.ngram_order));
    if (order < 0) fail_data("ngram_order must be non-negative");
    c.ngram_order = static_cast<std::size_t>(order);
    c.ngram_alpha = kv.get_double("ngram_alpha", c.ngram_alpha);
    return c;
}

namespace {

FeatureConfig load_feature_config(const PipelineConfig& c)
{
    return c.feature_config.empty() ? FeatureConfig{} : feature_config_from(KeyValueConfig::load(c.feature_config));
}

// Prefixes errors with the stage that raised them.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f())
{
    try {
        return f();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    } catch (const std::bad_alloc&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Data, std::string(name) + ": " + e.what());
    }
}

void require(const fs::path& p, const char* what)
{
    if (p.empty()) fail_data(std::string("config does not name the ") + what);
}

RobotMotion resample_motion(const RobotMotion& m, double rate)
{
    if (std::abs(m.frame_rate - rate) < 1e-9) return m;
    RobotMotion r = from_clip(resample_clip(to_clip(m, true), rate));
    if (r.frame_count() >= 2) r = compute_root_velocities(std::move(r));
    return r;
}

TokenStack first_frames(const TokenStack& s, std::size_t n)
{
    TokenStack out;
    out.part = s.part;
    out.tokens = s.tokens.topRows(static_cast<Eigen::Index>(n));
    return out;
}

} // namespace

void train_pipeline_models(PipelineConfig& config, const fs::path& corpus_manifest, const fs::path& model_dir)
{
    const KinematicTree robot = stage("load robot", [&] { return load_robot_description(config.robot.string()); });
    require(config.correspondence, "correspondence file");
    const Correspondence corr =
        stage("load correspondence", [&] { return parse_correspondence(text::read_file(config.correspondence)); });
    const RetargetConfig rcfg = stage("load retarget config", [&] {
        return config.retarget_config.empty() ? RetargetConfig{} : retarget_config_from(KeyValueConfig::load(config.retarget_config));
    });
    const FeatureConfig fcfg = stage("load feature config", [&] { return load_feature_config(config); });

    std::vector<RobotMotion> motions;
    std::vector<FeatureMatrix> features;
    const fs::path base = corpus_manifest.parent_path();
    const std::string manifest = text::read_file(corpus_manifest);
    for (auto line : text::split(manifest, '\n')) {
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto t = text::split_ws(line);
        if (t.size() != 2) fail_data("corpus manifest lines need 'bvh_path wav_path'");
        const fs::path bvh = base / std::string(t[0]), wav = base / std::string(t[1]);
        motions.push_back(stage("retarget", [&] {
            const BvhDocument doc = parse_bvh(text::read_file(bvh));
            return resample_motion(retarget_clip(doc, robot, corr, rcfg), fcfg.frame_rate());
        }));
        features.push_back(stage("audio features", [&] { return stack_features(read_wav_file(wav.string()), fcfg); }));
    }
    if (motions.empty()) fail_data("corpus manifest lists no clips");

    RvqTrainOptions ro;
    ro.layers = config.rvq_layers;
    ro.codes = config.rvq_codes;
    ro.seed = config.seed;
    const RvqModel body = stage("rvq train", [&] { return train_rvq(motions, BodyPart::Body, config.rvq_window, ro); });
    const RvqModel hand = stage("rvq train", [&] { return train_rvq(motions, BodyPart::Hand, config.rvq_window, ro); });

    FeatureMatrix all = features.front();
    for (std::size_t i = 1; i < features.size(); ++i) {
        Eigen::MatrixXd stacked(all.values.rows() + features[i].values.rows(), all.values.cols());
        stacked << all.values, features[i].values;
        all.values = std::move(stacked);
    }
    const AudioTokens audio = stage("quantize audio", [&] { return quantize_audio(all, config.audio_codes, config.seed); });

    std::vector<TokenStack> motion_tokens;
    std::vector<std::vector<int>> audio_tokens;
    for (std::size_t i = 0; i < motions.size(); ++i) {
        const TokenStack stack = concat_parts(encode(body, frame_features(body, motions[i])),
                                              encode(hand, frame_features(hand, motions[i])));
        auto at = assign_audio_tokens(audio.codebook, features[i]);
        const std::size_t n = std::min(stack.frame_count(), at.size());
        at.resize(n);
        motion_tokens.push_back(first_frames(stack, n));
        audio_tokens.push_back(std::move(at));
    }
    const NgramModel ngram = stage("train ngram", [&] {
        return train_ngram(motion_tokens, audio_tokens, config.ngram_order, config.ngram_alpha);
    });

    fs::create_directories(model_dir);
    config.rvq_body = model_dir / "rvq_body.rvq";
    config.rvq_hand = model_dir / "rvq_hand.rvq";
    config.audio_codebook = model_dir / "audio_codebook.rvq";
    config.ngram = model_dir / "ngram.txt";
    save_rvq(body, config.rvq_body.string());
    save_rvq(hand, config.rvq_hand.string());
    save_rvq(audio.codebook, config.audio_codebook.string());
    text::write_file(config.ngram, write_ngram(ngram));
}

PipelineResult run_pipeline(PipelineConfig config, const fs::path& wav, const fs::path& out_dir,
                            const PipelineOptions& options)
{
    fs::create_directories(out_dir);
    if (options.train_corpus) train_pipeline_models(config, *options.train_corpus, out_dir / "models");
    require(config.rvq_body, "body RVQ model");
    require(config.rvq_hand, "hand RVQ model");
    require(config.ngram, "n-gram model");
    require(config.audio_codebook, "audio codebook");

    PipelineResult result;
    auto emit = [&](const char* name, const std::string& content) {
        const fs::path p = out_dir / name;
        text::write_file(p, content);
        result.outputs.push_back(p);
    };

    const KinematicTree robot = stage("load robot", [&] { return load_robot_description(config.robot.string()); });
    const FeatureConfig fcfg = stage("load feature config", [&] { return load_feature_config(config); });
    const std::string wav_bytes = text::read_file(wav);
    const double ground_height = config.retarget_config.empty()
                                     ? 0.0
                                     : retarget_config_from(KeyValueConfig::load(config.retarget_config)).ground_height;

    const FeatureMatrix features = stage("audio features", [&] { return stack_features(read_wav_file(wav.string()), fcfg); });
    emit("features.txt", write_features(features));
    result.audio_frames = features.frame_count();

    const std::vector<int> audio_tokens = stage("audio tokens", [&] {
        return assign_audio_tokens(load_rvq(config.audio_codebook.string()), features);
    });
    emit("audio_tokens.txt", write_audio_tokens(audio_tokens));

    const RvqModel body = stage("load rvq", [&] { return load_rvq(config.rvq_body.string()); });
    const RvqModel hand = stage("load rvq", [&] { return load_rvq(config.rvq_hand.string()); });
    if (body.window != hand.window) fail_data("load rvq: body and hand models use different windows");
    const NgramModel ngram = stage("load ngram", [&] { return load_ngram(config.ngram.string()); });
    if (ngram.tuple_width() != body.layer_count() + hand.layer_count())
        fail_data("load ngram: model width does not match the RVQ layer counts");

    GenerationConfig gen;
    gen.seed = config.seed;
    gen.temperature = config.temperature;
    gen.splice_crossfade = config.crossfade;
    TokenStack tokens = stage("generate", [&] { return sample_sequence(ngram, audio_tokens, gen); });

    if (options.keywords) {
        stage("splice", [&] {
            if (config.gesture_library.empty()) fail_data("config does not name a gesture library");
            const GestureLibrary lib = load_gesture_library(config.gesture_library.string());
            const auto hit = retrieve_gesture(lib, keywords_from_text(*options.keywords));
            if (!hit) return;
            const GestureEntry& e = lib.entries[*hit];
            const std::size_t len = e.clip.frame_count();
            if (len > tokens.frame_count()) fail_data("gesture clip is longer than the generated sequence");
            const std::size_t lo = e.stroke_frame, hi = tokens.frame_count() - len + e.stroke_frame;
            const std::size_t at = std::clamp(options.splice_at.value_or(tokens.frame_count() / 2), lo, hi);
            const RvqModel* models[] = {&body, &hand};
            tokens = splice_semantic_gesture(tokens, e, at, config.crossfade, models);
            result.spliced = true;
            result.splice_begin = at - e.stroke_frame;
            result.splice_end = result.splice_begin + len;
        });
    }
    emit("motion_tokens.txt", write_tokens(tokens));

    RobotMotion ref = stage("decode", [&] {
        const auto [bt, ht] = split_parts(tokens, body.layer_count());
        Eigen::MatrixXd b = decode_channels(body, bt), h = decode_channels(hand, ht);
        const auto n = static_cast<Eigen::Index>(result.audio_frames);
        RobotMotion m = motion_from_channels(robot.dof_names(), features.frame_rate,
                                             {{body.channels, b.topRows(n)}, {hand.channels, h.topRows(n)}});
        return project_to_ground(robot, std::move(m), ground_height);
    });
    result.motion_frames = ref.frame_count();
    emit("ref_motion.txt", write_robot_motion(ref));

    const RobotMotion pd = stage("control map", [&] {
        const ActionScale scale = config.scales.empty() ? default_action_scale(robot)
                                                        : parse_action_scale(text::read_file(config.scales), robot);
        const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(ref.joint_angles.rows(), ref.joint_angles.cols());
        return apply_to_motion(ref, zero, scale, robot);
    });
    emit("pd_targets.txt", write_robot_motion(pd));

    const std::string report = stage("metrics", [&] {
        std::string r = format_report_txt(rmse_per_channel(to_clip(ref), to_clip(pd)));
        r += "# ground_penetration " + text::format_double(ground_penetration_score(pd, robot, ground_height)) + "\n";
        r += "# velocity_spikes_20 " + std::to_string(velocity_spike_count(pd, 20.0).count) + "\n";
        return r;
    });
    emit("report.txt", report);

    std::ostringstream m;
    m << "version " << kVersion << '\n';
    m << "seed " << config.seed << '\n';
    m << "temperature " << text::format_double(config.temperature) << '\n';
    m << "crossfade " << config.crossfade << '\n';
    m << "config_hash " << fnv1a_hex(config.source_text) << '\n';
    m << "wav " << wav.filename().string() << ' ' << fnv1a_hex(wav_bytes) << '\n';
    for (const auto& [key, p] : {std::pair<const char*, const fs::path*>{"robot", &config.robot},
                                 {"rvq_body", &config.rvq_body},
                                 {"rvq_hand", &config.rvq_hand},
                                 {"ngram", &config.ngram},
                                 {"audio_codebook", &config.audio_codebook}})
        m << key << ' ' << p->filename().string() << ' ' << fnv1a_hex(text::read_file(*p)) << '\n';
    m << "audio_frames " << result.audio_frames << '\n';
    m << "motion_frames " << result.motion_frames << '\n';
    if (result.spliced) m << "splice " << result.splice_begin << ' ' << result.splice_end << '\n';
    for (const auto& p : result.outputs) m << "output " << p.filename().string() << ' ' << fnv1a_hex(text::read_file(p)) << '\n';
    emit("manifest.txt", m.str());
    return result;
}

} // namespace grk

#include "grk/grk.h"

#include "grk/audio_features.hpp"
#include "grk/bvh.hpp"
#include "grk/control_map.hpp"
#include "grk/error.hpp"
#include "grk/generator.hpp"
#include "grk/kinematics.hpp"
#include "grk/metrics.hpp"
#include "grk/motion_clip.hpp"
#include "grk/pipeline.hpp"
#include "grk/retarget.hpp"
#include "grk/robot_motion.hpp"
#include "grk/rvq.hpp"
#include "grk/text.hpp"
#include "grk/wav.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <new>
#include <string>

struct grk_bvh {
    grk::BvhDocument doc;
};

struct grk_robot {
    grk::KinematicTree tree;
};

struct grk_motion {
    grk::RobotMotion motion;
};

struct grk_rvq {
    grk::RvqModel model;
};

namespace {

thread_local std::string last_error;

template <class F>
grk_status guard(F&& f) noexcept
{
    last_error.clear();
    try {
        f();
        return GRK_OK;
    } catch (const grk::Error& e) {
        last_error = e.what();
        switch (e.kind()) {
        case grk::ErrorKind::Usage: return GRK_E_USAGE;
        case grk::ErrorKind::Data: return GRK_E_DATA;
        case grk::ErrorKind::Io: return GRK_E_IO;
        }
        return GRK_E_INTERNAL;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return GRK_E_INTERNAL;
    } catch (const std::filesystem::filesystem_error& e) {
        last_error = e.what();
        return GRK_E_IO;
    } catch (const std::exception& e) {
        last_error = e.what();
        return GRK_E_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return GRK_E_INTERNAL;
    }
}

template <class T>
const T& need(const T* p, const char* what)
{
    if (!p) grk::fail_usage(std::string(what) + " must not be NULL");
    return *p;
}

std::string need_path(const char* p, const char* what)
{
    if (!p || !*p) grk::fail_usage(std::string(what) + " must be a non-empty path");
    return p;
}

grk::MotionClip bvh_clip(const grk::BvhDocument& doc)
{
    grk::MotionClip clip;
    clip.frame_rate = 1.0 / doc.frame_time;
    for (const auto& fj : grk::flatten(doc))
        for (auto c : fj.joint->channels) clip.channel_names.push_back(fj.joint->name + "_" + std::string(grk::to_string(c)));
    clip.values = doc.frames;
    return clip;
}

std::vector<int> foot_bodies(const grk::KinematicTree& tree)
{
    std::vector<int> feet;
    for (std::size_t b = 0; b < tree.body_count(); ++b)
        if (tree.body_name(static_cast<int>(b)).find("sole") != std::string::npos) feet.push_back(static_cast<int>(b));
    if (feet.empty())
        for (std::size_t b = 0; b < tree.body_count(); ++b)
            if (tree.body_name(static_cast<int>(b)).find("ankle_roll") != std::string::npos) feet.push_back(static_cast<int>(b));
    return feet;
}

} // namespace

extern "C" {

const char* grk_version(void) { return grk::kVersion; }

const char* grk_last_error(void) { return last_error.c_str(); }

// ---- BVH ----

grk_status grk_bvh_load(const char* path, double unit_scale, grk_bvh** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        grk::BvhReadOptions opt;
        if (unit_scale > 0.0) opt.unit_scale = unit_scale;
        auto doc = grk::parse_bvh(grk::text::read_file(need_path(path, "path")), opt);
        *out = new grk_bvh{std::move(doc)};
    });
}

grk_status grk_bvh_save(const grk_bvh* bvh, const char* path)
{
    return guard([&] { grk::text::write_file(need_path(path, "path"), grk::write_bvh(need(bvh, "bvh").doc)); });
}

grk_status grk_bvh_info_get(const grk_bvh* bvh, grk_bvh_info* info)
{
    return guard([&] {
        const auto& doc = need(bvh, "bvh").doc;
        if (!info) grk::fail_usage("info must not be NULL");
        info->joints = grk::flatten(doc).size();
        info->channels = doc.total_channels();
        info->frames = doc.frame_count();
        info->frame_time = doc.frame_time;
        info->unit_scale = doc.unit_scale;
    });
}

grk_status grk_bvh_save_clip(const grk_bvh* bvh, const char* path)
{
    return guard([&] { grk::text::write_file(need_path(path, "path"), grk::write_clip(bvh_clip(need(bvh, "bvh").doc))); });
}

grk_status grk_bvh_resample(grk_bvh* bvh, double frame_rate)
{
    return guard([&] {
        if (!bvh) grk::fail_usage("bvh must not be NULL");
        if (!(frame_rate > 0.0)) grk::fail_usage("frame rate must be positive");
        const auto clip = grk::resample_clip(bvh_clip(bvh->doc), frame_rate);
        bvh->doc.frames = clip.values;
        bvh->doc.frame_time = 1.0 / frame_rate;
    });
}

void grk_bvh_free(grk_bvh* bvh) { delete bvh; }

// ---- robot ----

grk_status grk_robot_load(const char* path, grk_robot** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        *out = new grk_robot{grk::load_robot_description(need_path(path, "path"))};
    });
}

grk_status grk_robot_from_bvh(const grk_bvh* bvh, grk_robot** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        *out = new grk_robot{grk::skeleton_from_bvh(need(bvh, "bvh").doc).tree};
    });
}

grk_status grk_robot_save(const grk_robot* robot, const char* path)
{
    return guard([&] {
        grk::text::write_file(need_path(path, "path"), grk::write_robot_description(need(robot, "robot").tree));
    });
}

size_t grk_robot_body_count(const grk_robot* robot) { return robot ? robot->tree.body_count() : 0; }

size_t grk_robot_dof_count(const grk_robot* robot) { return robot ? robot->tree.dof_count() : 0; }

grk_status grk_robot_body_name(const grk_robot* robot, size_t body, char* buf, size_t capacity)
{
    return guard([&] {
        const auto& tree = need(robot, "robot").tree;
        if (body >= tree.body_count()) grk::fail_usage("body index out of range");
        if (!buf || capacity == 0) grk::fail_usage("buffer must be non-empty");
        const std::string& name = tree.body_name(static_cast<int>(body));
        const std::size_t n = std::min(name.size(), capacity - 1);
        std::memcpy(buf, name.data(), n);
        buf[n] = '\0';
    });
}

grk_status grk_robot_fk(const grk_robot* robot, const double root_pos[3], const double root_quat[4],
                        const double* joint_angles, size_t dof_count, double* out_positions)
{
    return guard([&] {
        const auto& tree = need(robot, "robot").tree;
        if (!root_pos || !root_quat || !out_positions || (dof_count > 0 && !joint_angles))
            grk::fail_usage("fk arguments must not be NULL");
        if (dof_count != tree.dof_count()) grk::fail_usage("dof_count does not match the robot");
        grk::Pose pose;
        pose.root_position = Eigen::Vector3d(root_pos[0], root_pos[1], root_pos[2]);
        Eigen::Quaterniond q(root_quat[0], root_quat[1], root_quat[2], root_quat[3]);
        if (!(q.norm() > 1e-12)) grk::fail_data("root quaternion has zero norm");
        pose.root_orientation = q.normalized();
        pose.joint_angles = Eigen::Map<const Eigen::VectorXd>(joint_angles, static_cast<Eigen::Index>(dof_count));
        const auto fk = grk::forward_kinematics(tree, pose);
        for (std::size_t b = 0; b < tree.body_count(); ++b)
            for (int k = 0; k < 3; ++k) out_positions[3 * b + static_cast<std::size_t>(k)] = fk.position(static_cast<int>(b))[k];
    });
}

void grk_robot_free(grk_robot* robot) { delete robot; }

// ---- motion ----

grk_status grk_motion_load(const char* path, grk_motion** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        *out = new grk_motion{grk::load_robot_motion(need_path(path, "path"))};
    });
}

grk_status grk_motion_save(const grk_motion* motion, const char* path, int extended)
{
    return guard([&] {
        grk::text::write_file(need_path(path, "path"), grk::write_robot_motion(need(motion, "motion").motion, extended != 0));
    });
}

size_t grk_motion_frame_count(const grk_motion* motion) { return motion ? motion->motion.frame_count() : 0; }

double grk_motion_frame_rate(const grk_motion* motion) { return motion ? motion->motion.frame_rate : 0.0; }

grk_status grk_motion_resample(grk_motion* motion, double frame_rate)
{
    return guard([&] {
        if (!motion) grk::fail_usage("motion must not be NULL");
        if (!(frame_rate > 0.0)) grk::fail_usage("frame rate must be positive");
        auto m = grk::from_clip(grk::resample_clip(grk::to_clip(motion->motion, true), frame_rate));
        if (m.frame_count() >= 2) m = grk::compute_root_velocities(std::move(m));
        motion->motion = std::move(m);
    });
}

grk_status grk_motion_fk_save(const grk_motion* motion, const grk_robot* robot, const char* path)
{
    return guard([&] {
        const auto& tree = need(robot, "robot").tree;
        const auto fks = grk::motion_fk(tree, need(motion, "motion").motion);
        std::string out = "# frame body x y z\n";
        for (std::size_t f = 0; f < fks.size(); ++f) {
            auto row = [&](const std::string& name, const Eigen::Vector3d& p) {
                out += std::to_string(f) + ' ' + name + ' ' + grk::text::format_double(p.x()) + ' ' +
                       grk::text::format_double(p.y()) + ' ' + grk::text::format_double(p.z()) + '\n';
            };
            row(tree.body_name(grk::kRootBody), fks[f].root_position);
            for (std::size_t b = 0; b < tree.body_count(); ++b)
                row(tree.body_name(static_cast<int>(b)), fks[f].position(static_cast<int>(b)));
        }
        grk::text::write_file(need_path(path, "path"), out);
    });
}

void grk_motion_free(grk_motion* motion) { delete motion; }

// ---- retarget ----

grk_status grk_retarget(const grk_bvh* bvh, const grk_robot* robot, const char* correspondence_path,
                        const char* config_path, grk_motion** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        const auto corr = grk::parse_correspondence(grk::text::read_file(need_path(correspondence_path, "correspondence")));
        const grk::RetargetConfig cfg = config_path ? grk::retarget_config_from(grk::KeyValueConfig::load(config_path))
                                                    : grk::RetargetConfig{};
        *out = new grk_motion{grk::retarget_clip(need(bvh, "bvh").doc, need(robot, "robot").tree, corr, cfg)};
    });
}

// ---- metrics ----

grk_status grk_metrics_report(const grk_motion* ref, const grk_motion* test, const grk_robot* robot,
                              grk_report_format format, const char* out_path)
{
    return guard([&] {
        const auto& a = need(ref, "ref").motion;
        const auto& b = need(test, "test").motion;
        const auto report = grk::rmse_per_channel(grk::to_clip(a), grk::to_clip(b));
        std::string out;
        if (format == GRK_REPORT_CSV) {
            out = grk::format_report_csv(report);
        } else if (format == GRK_REPORT_TXT) {
            out = grk::format_report_txt(report);
            if (robot) {
                const auto& tree = robot->tree;
                const auto slide = grk::foot_sliding_score(b, tree, foot_bodies(tree));
                out += "# ground_penetration " + grk::text::format_double(grk::ground_penetration_score(b, tree, 0.0)) + "\n";
                out += "# foot_sliding " + grk::text::format_double(slide.score) + (slide.no_contact ? " no_contact" : "") + "\n";
                out += "# velocity_spikes_20 " + std::to_string(grk::velocity_spike_count(b, 20.0).count) + "\n";
            }
        } else {
            grk::fail_usage("unknown report format");
        }
        grk::text::write_file(need_path(out_path, "out_path"), out);
    });
}

// ---- RVQ ----

grk_status grk_rvq_train(const grk_motion* const* corpus, size_t count, const grk_rvq_params* params, grk_rvq** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        const auto& p = need(params, "params");
        if (!corpus || count == 0) grk::fail_usage("corpus must contain at least one motion");
        std::vector<grk::RobotMotion> motions;
        for (size_t i = 0; i < count; ++i) motions.push_back(need(corpus[i], "corpus entry").motion);
        grk::RvqTrainOptions o;
        o.layers = p.layers;
        o.codes = p.codes;
        o.seed = p.seed;
        const auto part = grk::parse_body_part(p.part ? p.part : "body");
        if (part == grk::BodyPart::Audio) grk::fail_usage("use grk_quantize_audio for audio codebooks");
        *out = new grk_rvq{grk::train_rvq(motions, part, p.window, o)};
    });
}

grk_status grk_rvq_load(const char* path, grk_rvq** out)
{
    return guard([&] {
        if (!out) grk::fail_usage("out must not be NULL");
        *out = nullptr;
        *out = new grk_rvq{grk::load_rvq(need_path(path, "path"))};
    });
}

grk_status grk_rvq_save(const grk_rvq* model, const char* path)
{
    return guard([&] { grk::save_rvq(need(model, "model").model, need_path(path, "path")); });
}

grk_status grk_rvq_encode(const grk_rvq* model, const grk_motion* motion, const char* tokens_path)
{
    return guard([&] {
        const auto& m = need(model, "model").model;
        const auto stack = grk::encode(m, grk::frame_features(m, need(motion, "motion").motion));
        grk::text::write_file(need_path(tokens_path, "tokens_path"), grk::write_tokens(stack));
    });
}

grk_status grk_rvq_decode(const grk_rvq* body, const char* body_tokens, const grk_rvq* hand, const char* hand_tokens,
                          const grk_robot* robot, double frame_rate, const char* motion_path)
{
    return guard([&] {
        const auto& tree = need(robot, "robot").tree;
        if (!body && !hand) grk::fail_usage("at least one RVQ model is required");
        if (!(frame_rate > 0.0)) grk::fail_usage("frame rate must be positive");
        std::vector<std::pair<std::vector<std::string>, Eigen::MatrixXd>> parts;
        for (auto [model, path] : {std::pair{body, body_tokens}, std::pair{hand, hand_tokens}}) {
            if (!model) continue;
            const auto stack = grk::load_tokens(need_path(path, "token file"));
            parts.emplace_back(model->model.channels, grk::decode_channels(model->model, stack));
        }
        const auto m = grk::motion_from_channels(tree.dof_names(), frame_rate, parts);
        grk::text::write_file(need_path(motion_path, "motion_path"), grk::write_robot_motion(m));
    });
}

grk_status grk_rvq_reconstruction_error(const grk_rvq* model, const grk_motion* motion, double* out, size_t capacity,
                                        size_t* layers)
{
    return guard([&] {
        const auto& m = need(model, "model").model;
        const auto curve = grk::reconstruction_error(m, grk::frame_features(m, need(motion, "motion").motion));
        if (layers) *layers = curve.size();
        if (out) std::copy_n(curve.begin(), std::min(capacity, curve.size()), out);
    });
}

void grk_rvq_free(grk_rvq* model) { delete model; }

// ---- audio ----

grk_status grk_audio_features(const char* wav_path, const char* config_path, const char* out_path)
{
    return guard([&] {
        const grk::FeatureConfig cfg = config_path ? grk::feature_config_from(grk::KeyValueConfig::load(config_path))
                                                   : grk::FeatureConfig{};
        const auto f = grk::stack_features(grk::read_wav_file(need_path(wav_path, "wav_path")), cfg);
        grk::text::write_file(need_path(out_path, "out_path"), grk::write_features(f));
    });
}

grk_status grk_quantize_audio(const char* features_path, size_t codes, uint64_t seed, const char* codebook_path,
                              const char* tokens_path)
{
    return guard([&] {
        if (codes == 0) grk::fail_usage("codes must be positive");
        const auto f = grk::load_features(need_path(features_path, "features_path"));
        const auto q = grk::quantize_audio(f, codes, seed);
        grk::save_rvq(q.codebook, need_path(codebook_path, "codebook_path"));
        grk::text::write_file(need_path(tokens_path, "tokens_path"), grk::write_audio_tokens(q.tokens));
    });
}

// ---- generation ----

grk_status grk_train_ngram(const char* const* motion_token_paths, const char* const* audio_token_paths, size_t count,
                           size_t order, double alpha, const char* model_path)
{
    return guard([&] {
        if (!motion_token_paths || !audio_token_paths || count == 0) grk::fail_usage("need at least one token file pair");
        std::vector<grk::TokenStack> motion;
        std::vector<std::vector<int>> audio;
        for (size_t i = 0; i < count; ++i) {
            motion.push_back(grk::load_tokens(need_path(motion_token_paths[i], "motion token file")));
            audio.push_back(grk::parse_audio_tokens(grk::text::read_file(need_path(audio_token_paths[i], "audio token file"))));
        }
        const auto model = grk::train_ngram(motion, audio, order, alpha);
        grk::text::write_file(need_path(model_path, "model_path"), grk::write_ngram(model));
    });
}

grk_status grk_generate(const char* model_path, const char* audio_tokens_path, uint64_t seed, double temperature,
                        size_t max_frames, const char* out_path)
{
    return guard([&] {
        const auto model = grk::load_ngram(need_path(model_path, "model_path"));
        const auto audio = grk::parse_audio_tokens(grk::text::read_file(need_path(audio_tokens_path, "audio_tokens_path")));
        grk::GenerationConfig cfg;
        cfg.seed = seed;
        cfg.temperature = temperature;
        cfg.max_frames = max_frames;
        grk::text::write_file(need_path(out_path, "out_path"), grk::write_tokens(grk::sample_sequence(model, audio, cfg)));
    });
}

grk_status grk_splice(const char* library_path, const char* keywords, const char* tokens_path, size_t at_frame,
                      size_t crossfade, const grk_rvq* rvq_body, const grk_rvq* rvq_hand, const char* out_path,
                      int* spliced)
{
    return guard([&] {
        if (spliced) *spliced = 0;
        const auto lib = grk::load_gesture_library(need_path(library_path, "library_path"));
        auto tokens = grk::load_tokens(need_path(tokens_path, "tokens_path"));
        std::vector<const grk::RvqModel*> models;
        if (rvq_body) models.push_back(&rvq_body->model);
        if (rvq_hand) models.push_back(&rvq_hand->model);
        if (models.empty()) grk::fail_usage("at least one RVQ model is required");
        const auto hit = grk::retrieve_gesture(lib, grk::keywords_from_text(keywords ? keywords : ""));
        if (hit) {
            tokens = grk::splice_semantic_gesture(tokens, lib.entries[*hit], at_frame, crossfade, models);
            if (spliced) *spliced = 1;
        }
        grk::text::write_file(need_path(out_path, "out_path"), grk::write_tokens(tokens));
    });
}

// ---- control ----

grk_status grk_control_map(const grk_motion* motion, const char* actions_path, const char* scales_path,
                           const grk_robot* robot, const char* out_path)
{
    return guard([&] {
        const auto& tree = need(robot, "robot").tree;
        const auto scale = scales_path ? grk::parse_action_scale(grk::text::read_file(scales_path), tree)
                                       : grk::default_action_scale(tree);
        const auto actions = grk::parse_matrix(grk::text::read_file(need_path(actions_path, "actions_path")));
        const auto out = grk::apply_to_motion(need(motion, "motion").motion, actions, scale, tree);
        grk::text::write_file(need_path(out_path, "out_path"), grk::write_robot_motion(out));
    });
}

// ---- pipeline ----

grk_status grk_pipeline(const char* config_path, const char* wav_path, const char* out_dir,
                        const grk_pipeline_options* options)
{
    return guard([&] {
        auto cfg = grk::load_pipeline_config(need_path(config_path, "config_path"));
        grk::PipelineOptions opt;
        if (options) {
            if (options->keywords) opt.keywords = std::string(options->keywords);
            if (options->splice_at >= 0) opt.splice_at = static_cast<std::size_t>(options->splice_at);
            if (options->train_corpus) opt.train_corpus = std::filesystem::path(options->train_corpus);
        }
        grk::run_pipeline(std::move(cfg), need_path(wav_path, "wav_path"), need_path(out_dir, "out_dir"), opt);
    });
}

} // extern "C"

// Command line front end. Everything goes through the C interface in grk.h.

#include "grk/grk.h"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace {

struct Failure {
    grk_status status;
};

void check(grk_status s)
{
    if (s != GRK_OK) throw Failure{s};
}

struct Free {
    void operator()(grk_bvh* p) const { grk_bvh_free(p); }
    void operator()(grk_robot* p) const { grk_robot_free(p); }
    void operator()(grk_motion* p) const { grk_motion_free(p); }
    void operator()(grk_rvq* p) const { grk_rvq_free(p); }
};

template <class T>
using Handle = std::unique_ptr<T, Free>;

Handle<grk_bvh> load_bvh(const std::string& path, double unit_scale)
{
    grk_bvh* p = nullptr;
    check(grk_bvh_load(path.c_str(), unit_scale, &p));
    return Handle<grk_bvh>(p);
}

Handle<grk_robot> load_robot(const std::string& path)
{
    grk_robot* p = nullptr;
    check(grk_robot_load(path.c_str(), &p));
    return Handle<grk_robot>(p);
}

Handle<grk_motion> load_motion(const std::string& path)
{
    grk_motion* p = nullptr;
    check(grk_motion_load(path.c_str(), &p));
    return Handle<grk_motion>(p);
}

Handle<grk_rvq> load_rvq(const std::string& path)
{
    if (path.empty()) return nullptr;
    grk_rvq* p = nullptr;
    check(grk_rvq_load(path.c_str(), &p));
    return Handle<grk_rvq>(p);
}

const char* opt_cstr(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Runs `write` against `out`, or against a scratch file echoed to stdout when
// `out` is empty or "-".
template <class F>
void to_file_or_stdout(const std::string& out, F&& write)
{
    if (!out.empty() && out != "-") {
        write(out.c_str());
        return;
    }
    const auto tmp = std::filesystem::temp_directory_path() / ("grk_stdout_" + std::to_string(::getpid()) + ".txt");
    struct Cleanup {
        std::filesystem::path p;
        ~Cleanup()
        {
            std::error_code ec;
            std::filesystem::remove(p, ec);
        }
    } cleanup{tmp};
    write(tmp.c_str());
    std::ifstream in(tmp);
    std::cout << in.rdbuf();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Speech-driven gesture toolkit: BVH I/O, retargeting, motion tokens, audio features and generation"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(grk_version()));

    std::function<void()> action;
    auto add = [&](const char* name, const char* help) { return app.add_subcommand(name, help); };

    // parse-bvh
    std::string in, out, robot, motion, corr, config, format = "txt";
    double unit_scale = 0.0, frame_rate = 0.0;
    bool extended = false;
    {
        auto* c = add("parse-bvh", "Parse a BVH file and print its structure summary");
        c->add_option("--in", in, "BVH file")->required();
        c->add_option("--unit-scale", unit_scale, "meters per file unit (default: automatic)");
        c->add_option("--clip", out, "also write the frames as a motion clip");
        c->callback([&] {
            action = [&] {
                auto bvh = load_bvh(in, unit_scale);
                grk_bvh_info info{};
                check(grk_bvh_info_get(bvh.get(), &info));
                std::cout << "joints " << info.joints << "\nchannels " << info.channels << "\nframes " << info.frames
                          << "\nframe_time " << info.frame_time << "\nunit_scale " << info.unit_scale << "\n";
                if (!out.empty()) check(grk_bvh_save_clip(bvh.get(), out.c_str()));
            };
        });
    }
    {
        auto* c = add("write-bvh", "Read a BVH file and write it back out (optionally resampled)");
        c->add_option("--in", in, "BVH file")->required();
        c->add_option("--out", out, "output BVH file")->required();
        c->add_option("--unit-scale", unit_scale, "meters per file unit (default: automatic)");
        c->add_option("--resample", frame_rate, "target frame rate in Hz");
        c->callback([&] {
            action = [&] {
                auto bvh = load_bvh(in, unit_scale);
                if (frame_rate > 0.0) check(grk_bvh_resample(bvh.get(), frame_rate));
                check(grk_bvh_save(bvh.get(), out.c_str()));
            };
        });
    }
    {
        auto* c = add("fk", "Write per-frame world positions of every body of a motion");
        c->add_option("--robot", robot, "robot description")->required();
        c->add_option("--motion", motion, "robot motion file")->required();
        c->add_option("--out", out, "output file ('-' for stdout)");
        c->callback([&] {
            action = [&] {
                auto r = load_robot(robot);
                auto m = load_motion(motion);
                to_file_or_stdout(out, [&](const char* p) { check(grk_motion_fk_save(m.get(), r.get(), p)); });
            };
        });
    }
    std::string bvh_path;
    {
        auto* c = add("retarget", "Retarget a BVH clip onto a robot");
        c->add_option("--bvh", bvh_path, "source BVH clip")->required();
        c->add_option("--robot", robot, "robot description")->required();
        c->add_option("--correspondence", corr, "human/robot body correspondence")->required();
        c->add_option("--config", config, "retarget configuration");
        c->add_option("--unit-scale", unit_scale, "meters per BVH unit (default: automatic)");
        c->add_option("--out", out, "output robot motion")->required();
        c->add_flag("--extended", extended, "also write root orientation and angular velocity columns");
        c->callback([&] {
            action = [&] {
                auto bvh = load_bvh(bvh_path, unit_scale);
                auto r = load_robot(robot);
                grk_motion* m = nullptr;
                check(grk_retarget(bvh.get(), r.get(), corr.c_str(), opt_cstr(config), &m));
                Handle<grk_motion> owned(m);
                check(grk_motion_save(m, out.c_str(), extended ? 1 : 0));
            };
        });
    }
    std::string ref, test;
    {
        auto* c = add("metrics", "Joint-wise RMSE table between two motions");
        c->add_option("--ref", ref, "reference motion")->required();
        c->add_option("--test", test, "motion to evaluate")->required();
        c->add_option("--robot", robot, "robot description (adds artifact scores)");
        c->add_option("--format", format, "txt or csv")->check(CLI::IsMember({"txt", "csv"}));
        c->add_option("--out", out, "output file ('-' for stdout)");
        c->callback([&] {
            action = [&] {
                auto a = load_motion(ref);
                auto b = load_motion(test);
                Handle<grk_robot> r = robot.empty() ? nullptr : load_robot(robot);
                const auto fmt = format == "csv" ? GRK_REPORT_CSV : GRK_REPORT_TXT;
                to_file_or_stdout(out, [&](const char* p) { check(grk_metrics_report(a.get(), b.get(), r.get(), fmt, p)); });
            };
        });
    }
    std::vector<std::string> motions;
    std::string part = "body";
    std::size_t layers = 4, codes = 256, window = 4;
    unsigned long long seed = 0;
    {
        auto* c = add("rvq-train", "Train residual VQ codebooks for one body part");
        c->add_option("--motion", motions, "training motion (repeatable)")->required();
        c->add_option("--part", part, "body or hand")->check(CLI::IsMember({"body", "hand", "combined"}));
        c->add_option("--layers", layers, "quantization layers");
        c->add_option("--codes", codes, "codes per layer");
        c->add_option("--window", window, "frames per feature window");
        c->add_option("--seed", seed, "random seed");
        c->add_option("--out", out, "model file")->required();
        c->callback([&] {
            action = [&] {
                std::vector<Handle<grk_motion>> owned;
                std::vector<const grk_motion*> raw;
                for (const auto& m : motions) {
                    owned.push_back(load_motion(m));
                    raw.push_back(owned.back().get());
                }
                grk_rvq_params p{part.c_str(), layers, codes, window, seed};
                grk_rvq* model = nullptr;
                check(grk_rvq_train(raw.data(), raw.size(), &p, &model));
                Handle<grk_rvq> h(model);
                check(grk_rvq_save(model, out.c_str()));
            };
        });
    }
    std::string model;
    {
        auto* c = add("rvq-encode", "Encode a motion into a token stack");
        c->add_option("--model", model, "RVQ model")->required();
        c->add_option("--motion", motion, "robot motion")->required();
        c->add_option("--out", out, "token file ('-' for stdout)");
        c->callback([&] {
            action = [&] {
                auto m = load_rvq(model);
                auto mo = load_motion(motion);
                to_file_or_stdout(out, [&](const char* p) { check(grk_rvq_encode(m.get(), mo.get(), p)); });
            };
        });
    }
    std::string body_model, body_tokens, hand_model, hand_tokens;
    {
        auto* c = add("rvq-decode", "Decode body and/or hand token stacks into a robot motion");
        c->add_option("--robot", robot, "robot description")->required();
        c->add_option("--body-model", body_model, "body RVQ model");
        c->add_option("--body-tokens", body_tokens, "body token file");
        c->add_option("--hand-model", hand_model, "hand RVQ model");
        c->add_option("--hand-tokens", hand_tokens, "hand token file");
        c->add_option("--frame-rate", frame_rate, "output frame rate in Hz")->required();
        c->add_option("--out", out, "output robot motion")->required();
        c->callback([&] {
            action = [&] {
                auto r = load_robot(robot);
                auto b = load_rvq(body_model);
                auto h = load_rvq(hand_model);
                check(grk_rvq_decode(b.get(), opt_cstr(body_tokens), h.get(), opt_cstr(hand_tokens), r.get(), frame_rate,
                                     out.c_str()));
            };
        });
    }
    std::string wav;
    {
        auto* c = add("audio-features", "Extract MFCC, delta, chroma, onset and tempogram features");
        c->add_option("--wav", wav, "input WAV")->required();
        c->add_option("--config", config, "feature configuration");
        c->add_option("--out", out, "feature file")->required();
        c->callback([&] { action = [&] { check(grk_audio_features(wav.c_str(), opt_cstr(config), out.c_str())); }; });
    }
    std::string features, codebook;
    std::size_t audio_codes = 16;
    {
        auto* c = add("quantize-audio", "Cluster audio feature frames into audio tokens");
        c->add_option("--features", features, "feature file")->required();
        c->add_option("--codes", audio_codes, "codebook size");
        c->add_option("--seed", seed, "random seed");
        c->add_option("--codebook", codebook, "output codebook model")->required();
        c->add_option("--out", out, "output audio token file")->required();
        c->callback([&] {
            action = [&] {
                check(grk_quantize_audio(features.c_str(), audio_codes, seed, codebook.c_str(), out.c_str()));
            };
        });
    }
    std::vector<std::string> motion_token_files, audio_token_files;
    std::size_t order = 2;
    double alpha = 0.1;
    {
        auto* c = add("train-ngram", "Train the audio-conditioned n-gram token model");
        c->add_option("--motion-tokens", motion_token_files, "motion token file (repeatable)")->required();
        c->add_option("--audio-tokens", audio_token_files, "aligned audio token file (repeatable)")->required();
        c->add_option("--order", order, "context length");
        c->add_option("--alpha", alpha, "add-alpha smoothing");
        c->add_option("--out", out, "model file")->required();
        c->callback([&] {
            action = [&] {
                if (motion_token_files.size() != audio_token_files.size()) {
                    std::cerr << "error: --motion-tokens and --audio-tokens must be given the same number of times\n";
                    throw Failure{GRK_E_USAGE};
                }
                std::vector<const char*> m, a;
                for (const auto& s : motion_token_files) m.push_back(s.c_str());
                for (const auto& s : audio_token_files) a.push_back(s.c_str());
                check(grk_train_ngram(m.data(), a.data(), m.size(), order, alpha, out.c_str()));
            };
        });
    }
    std::string audio_tokens;
    double temperature = 1.0;
    std::size_t max_frames = 0;
    {
        auto* c = add("generate", "Sample a motion token stack for a sequence of audio tokens");
        c->add_option("--model", model, "n-gram model")->required();
        c->add_option("--audio-tokens", audio_tokens, "audio token file")->required();
        c->add_option("--seed", seed, "random seed");
        c->add_option("--temperature", temperature, "sampling temperature (< 1e-6: argmax)");
        c->add_option("--max-frames", max_frames, "frame cap (0: audio length)");
        c->add_option("--out", out, "token file ('-' for stdout)");
        c->callback([&] {
            action = [&] {
                to_file_or_stdout(out, [&](const char* p) {
                    check(grk_generate(model.c_str(), audio_tokens.c_str(), seed, temperature, max_frames, p));
                });
            };
        });
    }
    std::string library, keywords, tokens;
    std::size_t at = 0, crossfade = 4;
    {
        auto* c = add("splice", "Splice a retrieved semantic gesture into a token stack");
        c->add_option("--library", library, "gesture library manifest")->required();
        c->add_option("--keywords", keywords, "transcript text or keywords")->required();
        c->add_option("--tokens", tokens, "generated token stack")->required();
        c->add_option("--at", at, "frame the gesture stroke lands on")->required();
        c->add_option("--crossfade", crossfade, "crossfade length in frames");
        c->add_option("--body-model", body_model, "body RVQ model")->required();
        c->add_option("--hand-model", hand_model, "hand RVQ model");
        c->add_option("--out", out, "output token file")->required();
        c->callback([&] {
            action = [&] {
                auto b = load_rvq(body_model);
                auto h = load_rvq(hand_model);
                int spliced = 0;
                check(grk_splice(library.c_str(), keywords.c_str(), tokens.c_str(), at, crossfade, b.get(), h.get(),
                                 out.c_str(), &spliced));
                std::cout << (spliced ? "spliced\n" : "no matching gesture\n");
            };
        });
    }
    std::string actions, scales;
    {
        auto* c = add("control-map", "Map policy actions to PD targets around a reference motion");
        c->add_option("--motion", motion, "reference motion")->required();
        c->add_option("--actions", actions, "action matrix, one row per frame")->required();
        c->add_option("--scales", scales, "per-joint scale file");
        c->add_option("--robot", robot, "robot description")->required();
        c->add_option("--out", out, "output PD target motion")->required();
        c->callback([&] {
            action = [&] {
                auto r = load_robot(robot);
                auto m = load_motion(motion);
                check(grk_control_map(m.get(), actions.c_str(), opt_cstr(scales), r.get(), out.c_str()));
            };
        });
    }
    std::string out_dir, train;
    long long splice_at = -1;
    {
        auto* c = add("pipeline", "Audio to reference motion and PD targets, end to end");
        c->add_option("--config", config, "pipeline configuration")->required();
        c->add_option("--wav", wav, "speech WAV")->required();
        c->add_option("--out-dir", out_dir, "output directory")->required();
        c->add_option("--keywords", keywords, "transcript text for semantic gesture retrieval");
        c->add_option("--splice-at", splice_at, "stroke frame for the retrieved gesture (default: middle)");
        c->add_option("--train", train, "corpus manifest to fit all models first");
        c->callback([&] {
            action = [&] {
                grk_pipeline_options o{};
                o.keywords = opt_cstr(keywords);
                o.splice_at = splice_at;
                o.train_corpus = opt_cstr(train);
                check(grk_pipeline(config.c_str(), wav.c_str(), out_dir.c_str(), &o));
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    try {
        if (action) action();
    } catch (const Failure& f) {
        if (f.status != GRK_OK && *grk_last_error()) std::cerr << "error: " << grk_last_error() << "\n";
        return f.status == GRK_E_USAGE ? 1 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

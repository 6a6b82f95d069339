// Regenerates the bundled data directory: configs, fixture clips, the speech
// WAV, a small paired training corpus, trained models and the gesture library.
//
//   make_fixtures <data_dir>

#include "../tests/fixtures.hpp"

#include "grk/control_map.hpp"
#include "grk/generator.hpp"
#include "grk/pipeline.hpp"
#include "grk/retarget.hpp"
#include "grk/rvq.hpp"
#include "grk/text.hpp"

#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace grk;

namespace {

void write_wav(const fs::path& p, const AudioBuffer& a)
{
    const auto bytes = write_wav_pcm16(a);
    text::write_file(p, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

const char* kRetargetCfg = R"(# damped least squares IK settings
damping_lambda = 0.05
max_iterations_stage1 = 50
max_iterations_stage2 = 100
convergence_tol = 1e-4
ground_height = 0
root_translation_scale = auto
)";

const char* kFeatureCfg = R"(sample_rate = 24000
fft_size = 2048
hop = 800
mel_bands = 40
mfcc_count = 13
chroma_bins = 12
tempogram_window = 32
)";

const char* kPipelineCfg = R"(robot = g1_29dof.desc
correspondence = human_to_g1.corr
retarget_config = retarget.cfg
feature_config = features.cfg
scales = scales.cfg
rvq_body = models/rvq_body.rvq
rvq_hand = models/rvq_hand.rvq
audio_codebook = models/audio_codebook.rvq
ngram = models/ngram.txt
gesture_library = gestures/library.txt
seed = 7
temperature = 0.8
crossfade = 4
rvq_layers = 4
rvq_codes = 64
rvq_window = 4
audio_codes = 16
ngram_order = 2
ngram_alpha = 0.1
)";

} // namespace

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: make_fixtures <data_dir>\n";
        return 1;
    }
    try {
        const fs::path dir = argv[1];
        fs::create_directories(dir / "fixtures");
        fs::create_directories(dir / "corpus");
        fs::create_directories(dir / "gestures");

        const KinematicTree robot = load_robot_description((dir / "g1_29dof.desc").string());
        const Correspondence corr = fixtures::human_to_g1();
        text::write_file(dir / "human_to_g1.corr", write_correspondence(corr));
        text::write_file(dir / "retarget.cfg", kRetargetCfg);
        text::write_file(dir / "features.cfg", kFeatureCfg);
        text::write_file(dir / "pipeline.cfg", kPipelineCfg);
        std::string scales = "# joint scale_radians\n";
        const ActionScale s = default_action_scale(robot);
        for (std::size_t j = 0; j < robot.dof_names().size(); ++j)
            scales += robot.dof_names()[j] + " " + text::format_double(s.scale[static_cast<Eigen::Index>(j)]) + "\n";
        text::write_file(dir / "scales.cfg", scales);

        text::write_file(dir / "fixtures/walk.bvh", write_bvh(fixtures::walking_clip()));
        text::write_file(dir / "fixtures/gesture.bvh", write_bvh(fixtures::gesture_clip(10.0, 30.0, 11)));
        text::write_file(dir / "fixtures/crouch.bvh", write_bvh(fixtures::crouch_clip()));
        write_wav(dir / "speech.wav", fixtures::speech_wav(8.0, 24000.0, 7));

        std::string corpus;
        for (int i = 0; i < 4; ++i) {
            const std::uint64_t seed = 101 + static_cast<std::uint64_t>(i);
            const std::string stem = "talk" + std::to_string(i);
            text::write_file(dir / "corpus" / (stem + ".bvh"), write_bvh(fixtures::gesture_clip(20.0, 30.0, seed)));
            write_wav(dir / "corpus" / (stem + ".wav"), fixtures::speech_wav(20.0, 24000.0, seed));
            corpus += stem + ".bvh " + stem + ".wav\n";
        }
        text::write_file(dir / "corpus/corpus.txt", corpus);

        PipelineConfig cfg = load_pipeline_config(dir / "pipeline.cfg");
        train_pipeline_models(cfg, dir / "corpus/corpus.txt", dir / "models");
        std::cout << "trained models in " << (dir / "models").string() << '\n';

        const RvqModel body = load_rvq(cfg.rvq_body.string()), hand = load_rvq(cfg.rvq_hand.string());
        const RetargetConfig rcfg = retarget_config_from(KeyValueConfig::parse(kRetargetCfg));
        std::string library;
        for (const auto& [kind, words] : {std::pair<const char*, const char*>{"wave", "hello,hi,wave,goodbye"},
                                          {"point", "you,there,that,look"},
                                          {"wide", "big,huge,large,everything"}}) {
            const RobotMotion m = retarget_clip(fixtures::emblem_clip(kind), robot, corr, rcfg);
            const TokenStack t = concat_parts(encode(body, frame_features(body, m)), encode(hand, frame_features(hand, m)));
            const std::string file = std::string(kind) + ".tok";
            text::write_file(dir / "gestures" / file, write_tokens(t));
            library += std::string(words) + " | " + file + " | " + std::to_string(t.frame_count() / 2) + "\n";
        }
        text::write_file(dir / "gestures/library.txt", library);
        std::cout << "wrote fixtures to " << dir.string() << '\n';
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

#include <doctest.h>

#include "fixtures.hpp"

#include "grk/error.hpp"
#include "grk/generator.hpp"

#include <cmath>
#include <numeric>

using namespace grk;

namespace {

TokenStack column(std::vector<int> v)
{
    TokenStack s;
    s.tokens.resize(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) s.tokens(static_cast<Eigen::Index>(i), 0) = v[i];
    return s;
}

const KinematicTree& g1()
{
    static const KinematicTree t = load_robot_description(fixtures::data_path("g1_29dof.desc"));
    return t;
}

struct Models {
    RvqModel body, hand;
    std::vector<const RvqModel*> ptrs() const { return {&body, &hand}; }
};

const Models& models()
{
    static const Models m = [] {
        const RobotMotion corpus = fixtures::g1_gesture_motion(g1(), 20.0, 30.0, 3);
        RvqTrainOptions o;
        o.layers = 2;
        o.codes = 16;
        return Models{train_rvq({corpus}, BodyPart::Body, 4, o), train_rvq({corpus}, BodyPart::Hand, 4, o)};
    }();
    return m;
}

TokenStack encode_both(const RobotMotion& m)
{
    const Models& ms = models();
    return concat_parts(encode(ms.body, frame_features(ms.body, m)), encode(ms.hand, frame_features(ms.hand, m)));
}

double max_jump(const Eigen::MatrixXd& z)
{
    double worst = 0.0;
    for (Eigen::Index t = 1; t < z.rows(); ++t) worst = std::max(worst, (z.row(t) - z.row(t - 1)).norm());
    return worst;
}

} // namespace

TEST_CASE("ngram: every distribution is normalized")
{
    const TokenStack m = column({1, 2, 3, 1, 2, 3, 4, 4, 1});
    const std::vector<int> a = {0, 0, 1, 1, 0, 0, 1, 1, 0};
    const NgramModel model = train_ngram({m}, {a}, 2, 0.1);
    for (const auto& [key, row] : model.counts()) {
        if (key.size() != model.order() + 1) continue;
        const std::vector<int> ctx(key.begin() + 1, key.end());
        const auto p = model.distribution(key[0], ctx);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    }
    const std::vector<int> unseen = {99, 98};
    const auto p = model.distribution(7, unseen);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
}

TEST_CASE("ngram: counts what follows a context")
{
    // Under audio 0, token 5 is always followed by 6.
    const TokenStack m = column({5, 6, 5, 6, 5, 6});
    const NgramModel model = train_ngram({m}, {std::vector<int>(6, 0)}, 1, 1e-9);
    const int a = model.vocabulary().lookup({5});
    const int b = model.vocabulary().lookup({6});
    const std::vector<int> ctx = {a};
    const auto p = model.distribution(0, ctx);
    CHECK(p[static_cast<std::size_t>(b)] == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(model.observed(0, ctx));
    CHECK_FALSE(model.observed(3, std::vector<int>{b, b}));
}

TEST_CASE("ngram: order zero is a smoothed unigram")
{
    const TokenStack m = column({1, 1, 1, 2});
    const NgramModel model = train_ngram({m}, {std::vector<int>(4, 0)}, 0, 1.0);
    const auto p = model.distribution(kAnyAudio, {});
    const int one = model.vocabulary().lookup({1});
    const int two = model.vocabulary().lookup({2});
    // V = 3 with the unknown id.
    CHECK(p[static_cast<std::size_t>(one)] == doctest::Approx(4.0 / 7.0));
    CHECK(p[static_cast<std::size_t>(two)] == doctest::Approx(2.0 / 7.0));
    CHECK(p[Vocabulary::kUnknown] == doctest::Approx(1.0 / 7.0));
}

TEST_CASE("ngram: a model with no counts has perplexity equal to its vocabulary size")
{
    NgramModel model(1, 0.5, 1);
    model.vocabulary().intern({0});
    model.vocabulary().intern({1});
    model.vocabulary().intern({2});
    const double v = static_cast<double>(model.vocabulary().size());
    CHECK(perplexity(model, column({0, 1, 2, 2, 1}), std::vector<int>(5, 0)) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("ngram: sampling is seeded and follows the audio length")
{
    const TokenStack m = column({1, 2, 3, 2, 1, 3, 3, 2, 1, 1, 2, 3});
    const std::vector<int> a = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const NgramModel model = train_ngram({m}, {a}, 2, 0.5);
    GenerationConfig c;
    c.seed = 4;
    const std::vector<int> audio(40, 1);
    const TokenStack s1 = sample_sequence(model, audio, c);
    CHECK(s1.frame_count() == 40);
    CHECK(s1.layer_count() == 1);
    CHECK(sample_sequence(model, audio, c).tokens == s1.tokens);
    c.seed = 5;
    CHECK(sample_sequence(model, audio, c).tokens != s1.tokens);
    c.max_frames = 10;
    CHECK(sample_sequence(model, audio, c).frame_count() == 10);
    for (Eigen::Index i = 0; i < s1.tokens.rows(); ++i) {
        CHECK(s1.tokens(i, 0) >= 1);
        CHECK(s1.tokens(i, 0) <= 3);
    }
    c.temperature = -1.0;
    CHECK_THROWS_AS(sample_sequence(model, audio, c), Error);
}

TEST_CASE("ngram: training rejects misaligned inputs and text round trips")
{
    const TokenStack m = column({1, 2, 3});
    CHECK_THROWS_AS(train_ngram({m}, {{0, 0}}, 2, 0.1), Error);
    CHECK_THROWS_AS(train_ngram({m}, {}, 2, 0.1), Error);
    const NgramModel model = train_ngram({m}, {{0, 1, 0}}, 2, 0.25);
    const std::string text = write_ngram(model);
    const NgramModel back = parse_ngram(text);
    CHECK(back.order() == 2);
    CHECK(back.alpha() == 0.25);
    CHECK(back.counts() == model.counts());
    CHECK(write_ngram(back) == text);
}

TEST_CASE("retrieval: keyword overlap, ties and misses")
{
    GestureLibrary lib;
    lib.entries.resize(3);
    lib.entries[0].keywords = {"hello", "hi"};
    lib.entries[1].keywords = {"big", "huge"};
    lib.entries[2].keywords = {"hi", "there"};
    CHECK(retrieve_gesture(lib, keywords_from_text("Hello, HI!")) == 0u);
    CHECK(retrieve_gesture(lib, {"hi"}) == 0u);
    CHECK(retrieve_gesture(lib, {"huge"}) == 1u);
    CHECK(retrieve_gesture(lib, {"there", "hi"}) == 2u);
    CHECK_FALSE(retrieve_gesture(lib, {"nothing"}).has_value());
    CHECK(keywords_from_text("a-b  C3") == std::set<std::string>{"a", "b", "c3"});
}

TEST_CASE("retrieval: library manifest parsing")
{
    const auto dir = std::filesystem::path(fixtures::data_path("gestures/library.txt")).parent_path();
    const GestureLibrary lib = parse_gesture_library("# comment\nwave,Hello | wave.tok | 3\n", dir);
    REQUIRE(lib.entries.size() == 1);
    CHECK(lib.entries[0].keywords == std::set<std::string>{"hello", "wave"});
    CHECK(lib.entries[0].stroke_frame == 3);
    CHECK(lib.entries[0].clip.frame_count() > 3);
    CHECK_THROWS_AS(parse_gesture_library("wave | wave.tok\n", dir), Error);
    CHECK_THROWS_AS(parse_gesture_library("wave | missing.tok | 1\n", dir), Error);
}

TEST_CASE("splice: without crossfade the window holds the clip and nothing else changes")
{
    const TokenStack gen = encode_both(fixtures::g1_gesture_motion(g1(), 6.0, 30.0, 21));
    GestureEntry e;
    e.clip = encode_both(fixtures::g1_gesture_motion(g1(), 1.5, 30.0, 22));
    e.stroke_frame = 10;
    const auto ptrs = models().ptrs();
    const std::size_t at = 80;
    const TokenStack out = splice_semantic_gesture(gen, e, at, 0, ptrs);
    REQUIRE(out.frame_count() == gen.frame_count());
    const auto start = static_cast<Eigen::Index>(at - e.stroke_frame);
    const auto len = static_cast<Eigen::Index>(e.clip.frame_count());
    CHECK(out.tokens.middleRows(start, len) == e.clip.tokens);
    CHECK(out.tokens.topRows(start) == gen.tokens.topRows(start));
    const Eigen::Index tail = out.tokens.rows() - start - len;
    CHECK(out.tokens.bottomRows(tail) == gen.tokens.bottomRows(tail));

    // Splicing a piece of the sequence onto itself is the identity.
    GestureEntry self;
    self.clip.part = gen.part;
    self.clip.tokens = gen.tokens.middleRows(40, 20);
    self.stroke_frame = 5;
    CHECK(splice_semantic_gesture(gen, self, 45, 0, ptrs).tokens == gen.tokens);
    CHECK(splice_semantic_gesture(gen, self, 45, 6, ptrs).tokens == gen.tokens);
}

TEST_CASE("splice: crossfade never makes the boundary jump larger")
{
    const TokenStack gen = encode_both(fixtures::g1_gesture_motion(g1(), 6.0, 30.0, 31));
    GestureEntry e;
    e.clip = encode_both(fixtures::g1_gesture_motion(g1(), 1.5, 30.0, 32));
    e.stroke_frame = 20;
    const auto ptrs = models().ptrs();
    const TokenStack hard = splice_semantic_gesture(gen, e, 90, 0, ptrs);
    const TokenStack soft = splice_semantic_gesture(gen, e, 90, 8, ptrs);
    const double base = max_jump(stack_latent(gen, ptrs));
    const double j_hard = max_jump(stack_latent(hard, ptrs));
    const double j_soft = max_jump(stack_latent(soft, ptrs));
    CHECK(j_soft <= j_hard);
    CHECK(j_soft <= std::max(base, j_hard));
    // Outside the crossfaded window the tokens are untouched.
    const Eigen::Index first = 90 - 20 - 8;
    const Eigen::Index last = 90 - 20 + static_cast<Eigen::Index>(e.clip.frame_count()) + 8;
    CHECK(soft.tokens.topRows(first) == gen.tokens.topRows(first));
    CHECK(soft.tokens.bottomRows(gen.tokens.rows() - last) == gen.tokens.bottomRows(gen.tokens.rows() - last));
}

TEST_CASE("splice: shape errors")
{
    const TokenStack gen = encode_both(fixtures::g1_gesture_motion(g1(), 2.0, 30.0, 41));
    GestureEntry e;
    e.clip = column({1, 2, 3});
    const auto ptrs = models().ptrs();
    CHECK_THROWS_AS(splice_semantic_gesture(gen, e, 10, 0, ptrs), Error);
    e.clip.tokens = gen.tokens.topRows(5);
    e.stroke_frame = 2;
    CHECK_THROWS_AS(splice_semantic_gesture(gen, e, 1, 0, ptrs), Error);
    CHECK_THROWS_AS(splice_semantic_gesture(gen, e, gen.frame_count(), 0, ptrs), Error);
}

#include "grk/generator.hpp"

#include "grk/error.hpp"
#include "grk/kmeans.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

namespace grk {

Vocabulary::Vocabulary() { tuples_.emplace_back(); }

int Vocabulary::intern(const std::vector<int>& tuple)
{
    auto [it, inserted] = ids_.emplace(tuple, static_cast<int>(tuples_.size()));
    if (inserted) tuples_.push_back(tuple);
    return it->second;
}

int Vocabulary::lookup(const std::vector<int>& tuple) const
{
    auto it = ids_.find(tuple);
    return it == ids_.end() ? kUnknown : it->second;
}

NgramModel::NgramModel(std::size_t order, double alpha, std::size_t tuple_width)
    : order_(order), alpha_(alpha), tuple_width_(tuple_width)
{
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail_usage("smoothing alpha must be positive");
    if (order > 16) fail_usage("n-gram order above 16 is not supported");
}

namespace {

NgramModel::Key make_key(int audio, std::span<const int> context)
{
    NgramModel::Key k;
    k.reserve(context.size() + 1);
    k.push_back(audio);
    k.insert(k.end(), context.begin(), context.end());
    return k;
}

} // namespace

void NgramModel::add(int audio_token, std::span<const int> context, int next)
{
    if (context.size() != order_) fail_usage("context length does not match the model order");
    if (next <= 0 || static_cast<std::size_t>(next) >= vocab_.size()) fail_usage("next token is not in the vocabulary");
    ++counts_[make_key(audio_token, context)][next];
    const Key any = make_key(kAnyAudio, context);
    ++counts_[any][next];
    if (order_ > 0) ++counts_[Key{kAnyAudio}][next];
}

std::vector<double> NgramModel::smoothed(const std::map<int, std::uint64_t>& row) const
{
    const std::size_t v = vocab_.size();
    double total = 0.0;
    for (const auto& [tok, c] : row) total += static_cast<double>(c);
    const double denom = total + alpha_ * static_cast<double>(v);
    std::vector<double> p(v, alpha_ / denom);
    for (const auto& [tok, c] : row) p[static_cast<std::size_t>(tok)] = (static_cast<double>(c) + alpha_) / denom;
    return p;
}

bool NgramModel::observed(int audio_token, std::span<const int> context) const
{
    return counts_.count(make_key(audio_token, context)) > 0;
}

std::vector<double> NgramModel::distribution(int audio_token, std::span<const int> context) const
{
    if (context.size() != order_) fail_usage("context length does not match the model order");
    for (const Key& k : {make_key(audio_token, context), make_key(kAnyAudio, context), Key{kAnyAudio}}) {
        auto it = counts_.find(k);
        if (it != counts_.end()) return smoothed(it->second);
    }
    return std::vector<double>(vocab_.size(), 1.0 / static_cast<double>(vocab_.size()));
}

std::vector<int> to_super_tokens(const NgramModel& model, const TokenStack& stack)
{
    if (stack.layer_count() != model.tuple_width())
        fail_data("token stack has " + std::to_string(stack.layer_count()) + " layers, the model expects " +
                  std::to_string(model.tuple_width()));
    std::vector<int> ids(stack.frame_count());
    std::vector<int> tuple(stack.layer_count());
    for (std::size_t f = 0; f < ids.size(); ++f) {
        for (std::size_t l = 0; l < tuple.size(); ++l)
            tuple[l] = stack.tokens(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(l));
        ids[f] = model.vocabulary().lookup(tuple);
    }
    return ids;
}

namespace {

void check_aligned(const TokenStack& motion, const std::vector<int>& audio)
{
    if (motion.frame_count() != audio.size())
        fail_data("motion tokens (" + std::to_string(motion.frame_count()) + " frames) and audio tokens (" +
                  std::to_string(audio.size()) + ") are not aligned");
}

// Slides the context window one step.
void push_context(std::vector<int>& ctx, int token)
{
    if (ctx.empty()) return;
    std::rotate(ctx.begin(), ctx.begin() + 1, ctx.end());
    ctx.back() = token;
}

} // namespace

NgramModel train_ngram(const std::vector<TokenStack>& motion_tokens, const std::vector<std::vector<int>>& audio_tokens,
                       std::size_t order, double alpha)
{
    if (motion_tokens.empty()) fail_data("n-gram training corpus is empty");
    if (motion_tokens.size() != audio_tokens.size()) fail_data("need one audio token sequence per motion sequence");
    NgramModel model(order, alpha, motion_tokens.front().layer_count());
    for (std::size_t s = 0; s < motion_tokens.size(); ++s) {
        check_aligned(motion_tokens[s], audio_tokens[s]);
        if (motion_tokens[s].layer_count() != model.tuple_width()) fail_data("token stacks differ in layer count");
        std::vector<int> ctx(order, kStartToken);
        std::vector<int> tuple(model.tuple_width());
        for (std::size_t f = 0; f < motion_tokens[s].frame_count(); ++f) {
            for (std::size_t l = 0; l < tuple.size(); ++l)
                tuple[l] = motion_tokens[s].tokens(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(l));
            const int id = model.vocabulary().intern(tuple);
            model.add(audio_tokens[s][f], ctx, id);
            push_context(ctx, id);
        }
    }
    return model;
}

double perplexity(const NgramModel& model, const TokenStack& motion_tokens, const std::vector<int>& audio_tokens)
{
    check_aligned(motion_tokens, audio_tokens);
    if (audio_tokens.empty()) fail_data("perplexity of an empty sequence");
    const auto ids = to_super_tokens(model, motion_tokens);
    std::vector<int> ctx(model.order(), kStartToken);
    double nll = 0.0;
    for (std::size_t f = 0; f < ids.size(); ++f) {
        const auto p = model.distribution(audio_tokens[f], ctx);
        nll -= std::log(p[static_cast<std::size_t>(ids[f])]);
        push_context(ctx, ids[f]);
    }
    return std::exp(nll / static_cast<double>(ids.size()));
}

TokenStack sample_sequence(const NgramModel& model, const std::vector<int>& audio_tokens, const GenerationConfig& config,
                           BodyPart part)
{
    if (audio_tokens.empty()) fail_data("cannot generate without audio tokens");
    if (!(config.temperature >= 0.0) || !std::isfinite(config.temperature)) fail_usage("temperature must be non-negative");
    if (model.vocabulary().size() < 2) fail_data("n-gram model has an empty vocabulary");
    const std::size_t frames =
        config.max_frames > 0 ? std::min(config.max_frames, audio_tokens.size()) : audio_tokens.size();
    std::mt19937_64 rng(config.seed);
    TokenStack out;
    out.part = part;
    out.tokens.resize(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(model.tuple_width()));
    std::vector<int> ctx(model.order(), kStartToken);
    const bool greedy = config.temperature < 1e-6;
    for (std::size_t f = 0; f < frames; ++f) {
        auto p = model.distribution(audio_tokens[f], ctx);
        p[Vocabulary::kUnknown] = 0.0; // never emit the unknown tuple
        int pick = 1;
        if (greedy) {
            pick = static_cast<int>(std::max_element(p.begin() + 1, p.end()) - p.begin());
        } else {
            double lmax = -HUGE_VAL;
            for (std::size_t i = 1; i < p.size(); ++i) lmax = std::max(lmax, std::log(p[i]));
            std::vector<double> w(p.size(), 0.0);
            double total = 0.0;
            for (std::size_t i = 1; i < p.size(); ++i) total += w[i] = std::exp((std::log(p[i]) - lmax) / config.temperature);
            const double u = uniform01(rng) * total;
            double acc = 0.0;
            pick = static_cast<int>(p.size()) - 1;
            for (std::size_t i = 1; i < p.size(); ++i) {
                acc += w[i];
                if (u < acc) {
                    pick = static_cast<int>(i);
                    break;
                }
            }
        }
        const auto& tuple = model.vocabulary().tuple(pick);
        for (std::size_t l = 0; l < tuple.size(); ++l)
            out.tokens(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(l)) = tuple[l];
        push_context(ctx, pick);
    }
    return out;
}

// ---- model text -----------------------------------------------------------------

std::string write_ngram(const NgramModel& model)
{
    std::ostringstream os;
    os << "ngram order " << model.order() << " alpha " << text::format_double(model.alpha()) << " width "
       << model.tuple_width() << '\n';
    os << "vocab " << model.vocabulary().size() - 1 << '\n';
    for (std::size_t id = 1; id < model.vocabulary().size(); ++id) {
        os << id;
        for (int t : model.vocabulary().tuple(static_cast<int>(id))) os << ' ' << t;
        os << '\n';
    }
    os << "contexts " << model.counts().size() << '\n';
    for (const auto& [key, row] : model.counts()) {
        for (std::size_t i = 0; i < key.size(); ++i) os << (i ? " " : "") << key[i];
        os << " :";
        for (const auto& [tok, c] : row) os << ' ' << tok << '=' << c;
        os << '\n';
    }
    return os.str();
}

NgramModel parse_ngram(std::string_view src)
{
    std::vector<std::string_view> lines;
    for (auto line : text::split(src, '\n')) {
        line = text::trim(line);
        if (!line.empty() && line.front() != '#') lines.push_back(line);
    }
    std::size_t at = 0;
    auto next_line = [&]() -> std::string_view {
        if (at >= lines.size()) fail_data("n-gram model file is truncated");
        return lines[at++];
    };
    auto head = text::split_ws(next_line());
    if (head.size() != 7 || head[0] != "ngram" || head[1] != "order" || head[3] != "alpha" || head[5] != "width")
        fail_data("not an n-gram model file");
    const auto order = text::parse_int(head[2], "order");
    const auto width = text::parse_int(head[6], "width");
    if (order < 0 || width < 1) fail_data("n-gram order/width out of range");
    NgramModel model(static_cast<std::size_t>(order), text::parse_double(head[4], "alpha"), static_cast<std::size_t>(width));

    auto vhead = text::split_ws(next_line());
    if (vhead.size() != 2 || vhead[0] != "vocab") fail_data("n-gram model: expected 'vocab <n>'");
    const auto vocab = text::parse_int(vhead[1], "vocab size");
    for (long long i = 1; i <= vocab; ++i) {
        auto t = text::split_ws(next_line());
        if (t.size() != static_cast<std::size_t>(width) + 1 || text::parse_int(t[0], "token id") != i)
            fail_data("n-gram model: malformed vocabulary entry " + std::to_string(i));
        std::vector<int> tuple;
        for (std::size_t k = 1; k < t.size(); ++k) tuple.push_back(static_cast<int>(text::parse_int(t[k], "token")));
        if (model.vocabulary().intern(tuple) != i) fail_data("n-gram model: duplicate vocabulary tuple");
    }
    auto chead = text::split_ws(next_line());
    if (chead.size() != 2 || chead[0] != "contexts") fail_data("n-gram model: expected 'contexts <n>'");
    const auto contexts = text::parse_int(chead[1], "context count");
    for (long long i = 0; i < contexts; ++i) {
        auto line = next_line();
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) fail_data("n-gram model: context line without ':'");
        NgramModel::Key key;
        for (auto t : text::split_ws(line.substr(0, colon))) key.push_back(static_cast<int>(text::parse_int(t, "context")));
        if (key.empty() || key.size() > static_cast<std::size_t>(order) + 1) fail_data("n-gram model: bad context key");
        auto& row = model.counts()[key];
        for (auto t : text::split_ws(line.substr(colon + 1))) {
            const auto eq = t.find('=');
            if (eq == std::string_view::npos) fail_data("n-gram model: expected token=count");
            const auto tok = text::parse_int(t.substr(0, eq), "token");
            const auto c = text::parse_int(t.substr(eq + 1), "count");
            if (tok <= 0 || tok > vocab || c < 0) fail_data("n-gram model: count entry out of range");
            row[static_cast<int>(tok)] = static_cast<std::uint64_t>(c);
        }
    }
    if (at != lines.size()) fail_data("n-gram model file has trailing lines");
    return model;
}

NgramModel load_ngram(const std::string& path) { return parse_ngram(text::read_file(path)); }

// ---- gesture library ------------------------------------------------------------

GestureLibrary parse_gesture_library(std::string_view src, const std::filesystem::path& base_dir)
{
    GestureLibrary lib;
    std::size_t line_no = 0;
    for (auto line : text::split(src, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = text::split(line, '|');
        const std::string where = "gesture library line " + std::to_string(line_no);
        if (fields.size() != 3) fail_data(where + ": expected 'keywords | clip | stroke_frame'");
        GestureEntry e;
        for (auto kw : text::split(fields[0], ',')) {
            kw = text::trim(kw);
            if (kw.empty()) continue;
            std::string k(kw);
            std::transform(k.begin(), k.end(), k.begin(), [](unsigned char c) { return std::tolower(c); });
            e.keywords.insert(k);
        }
        if (e.keywords.empty()) fail_data(where + ": no keywords");
        e.clip_path = std::string(text::trim(fields[1]));
        const auto path = base_dir / e.clip_path;
        e.clip = load_tokens(path.string());
        const auto stroke = text::parse_int(text::trim(fields[2]), "stroke frame");
        if (stroke < 0 || static_cast<std::size_t>(stroke) >= e.clip.frame_count())
            fail_data(where + ": stroke frame outside the clip");
        e.stroke_frame = static_cast<std::size_t>(stroke);
        lib.entries.push_back(std::move(e));
    }
    return lib;
}

GestureLibrary load_gesture_library(const std::string& path)
{
    return parse_gesture_library(text::read_file(path), std::filesystem::path(path).parent_path());
}

std::set<std::string> keywords_from_text(std::string_view src)
{
    std::set<std::string> out;
    std::string word;
    for (char ch : src) {
        const auto c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (!word.empty()) {
            out.insert(word);
            word.clear();
        }
    }
    if (!word.empty()) out.insert(word);
    return out;
}

std::optional<std::size_t> retrieve_gesture(const GestureLibrary& library, const std::set<std::string>& keywords)
{
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t i = 0; i < library.entries.size(); ++i) {
        const auto& kw = library.entries[i].keywords;
        if (kw.empty()) continue;
        std::size_t shared = 0;
        for (const auto& k : kw) shared += keywords.count(k);
        const double score = static_cast<double>(shared) / static_cast<double>(kw.size());
        if (shared > 0 && score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return best;
}

// ---- latent splicing ------------------------------------------------------------

namespace {

std::size_t total_layers(std::span<const RvqModel* const> models)
{
    std::size_t n = 0;
    for (const auto* m : models) n += m->layer_count();
    return n;
}

TokenStack layer_slice(const TokenStack& stack, std::size_t first, std::size_t count, BodyPart part)
{
    TokenStack s;
    s.part = part;
    s.tokens = stack.tokens.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
    return s;
}

} // namespace

Eigen::MatrixXd stack_latent(const TokenStack& stack, std::span<const RvqModel* const> models)
{
    if (models.empty()) fail_usage("at least one RVQ model is required");
    if (stack.layer_count() != total_layers(models))
        fail_data("token stack has " + std::to_string(stack.layer_count()) + " layers, the models have " +
                  std::to_string(total_layers(models)));
    Eigen::Index dims = 0;
    for (const auto* m : models) dims += static_cast<Eigen::Index>(m->dim());
    Eigen::MatrixXd out(stack.tokens.rows(), dims);
    std::size_t layer = 0;
    Eigen::Index col = 0;
    for (const auto* m : models) {
        const auto d = static_cast<Eigen::Index>(m->dim());
        out.middleCols(col, d) = decode_latent(*m, layer_slice(stack, layer, m->layer_count(), m->part));
        layer += m->layer_count();
        col += d;
    }
    return out;
}

TokenStack splice_semantic_gesture(const TokenStack& generated, const GestureEntry& clip, std::size_t at_frame,
                                   std::size_t crossfade, std::span<const RvqModel* const> models)
{
    const std::size_t len = clip.clip.frame_count();
    if (len == 0) fail_data("gesture clip is empty");
    if (clip.stroke_frame >= len) fail_data("gesture stroke frame outside the clip");
    if (at_frame >= generated.frame_count()) fail_data("splice frame " + std::to_string(at_frame) + " is out of range");
    if (at_frame < clip.stroke_frame) fail_data("splice frame is too early for the clip's stroke frame");
    const std::size_t start = at_frame - clip.stroke_frame;
    if (start + len > generated.frame_count()) fail_data("gesture clip is too long for the generated sequence");

    const Eigen::MatrixXd gen_latent =
        stack_latent(layer_slice(generated, 0, generated.layer_count(), generated.part), models)
            .middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len));
    const Eigen::MatrixXd clip_latent = stack_latent(clip.clip, models);

    TokenStack out = generated;
    const double ramp = static_cast<double>(crossfade + 1);
    for (std::size_t i = 0; i < len; ++i) {
        const double w = crossfade == 0 ? 1.0
                                        : std::min({1.0, static_cast<double>(i + 1) / ramp,
                                                    static_cast<double>(len - i) / ramp});
        const auto r = static_cast<Eigen::Index>(i);
        const auto frame = static_cast<Eigen::Index>(start + i);
        std::size_t layer = 0;
        Eigen::Index col = 0;
        for (const auto* m : models) {
            const auto d = static_cast<Eigen::Index>(m->dim());
            const auto g = gen_latent.row(r).segment(col, d);
            const auto c = clip_latent.row(r).segment(col, d);
            // An unchanged latent keeps its tokens.
            if (c != g) {
                const Eigen::MatrixXd blended = ((1.0 - w) * g + w * c);
                const TokenStack enc = encode(*m, blended);
                out.tokens.block(frame, static_cast<Eigen::Index>(layer), 1, static_cast<Eigen::Index>(m->layer_count())) =
                    enc.tokens;
            }
            layer += m->layer_count();
            col += d;
        }
    }
    return out;
}

} // namespace grk

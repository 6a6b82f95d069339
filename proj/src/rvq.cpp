#include "grk/rvq.hpp"

#include "grk/error.hpp"
#include "grk/kmeans.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <set>

namespace grk {

std::string_view to_string(BodyPart part)
{
    switch (part) {
    case BodyPart::Body: return "body";
    case BodyPart::Hand: return "hand";
    case BodyPart::Combined: return "combined";
    case BodyPart::Audio: return "audio";
    }
    return "unknown";
}

BodyPart parse_body_part(std::string_view name)
{
    if (name == "body") return BodyPart::Body;
    if (name == "hand") return BodyPart::Hand;
    if (name == "combined") return BodyPart::Combined;
    if (name == "audio") return BodyPart::Audio;
    fail_usage("unknown body part '" + std::string(name) + "' (expected body, hand or combined)");
}

namespace {

bool contains_any(const std::string& s, std::initializer_list<const char*> keys)
{
    return std::any_of(keys.begin(), keys.end(), [&](const char* k) { return s.find(k) != std::string::npos; });
}

bool is_hand_joint(const std::string& n) { return contains_any(n, {"shoulder", "elbow", "wrist", "hand"}); }

} // namespace

std::vector<std::string> part_channels(const std::vector<std::string>& joint_names, BodyPart part)
{
    if (part == BodyPart::Audio) fail_usage("the audio part has no motion channels");
    std::vector<std::string> out;
    if (part == BodyPart::Body || part == BodyPart::Combined) out.emplace_back("root_pos_z");
    for (const auto& j : joint_names) {
        const bool hand = is_hand_joint(j);
        if (part == BodyPart::Combined || (part == BodyPart::Hand) == hand) out.push_back(j);
    }
    if (out.empty()) fail_data("no channels for part " + std::string(to_string(part)));
    return out;
}

Eigen::MatrixXd select_channels(const RobotMotion& motion, const std::vector<std::string>& channels)
{
    validate(motion);
    const auto n = static_cast<Eigen::Index>(motion.frame_count());
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(channels.size()));
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& name = channels[c];
        const auto col = static_cast<Eigen::Index>(c);
        auto root_axis = [&](std::string_view prefix) -> int {
            if (name.size() == prefix.size() + 1 && name.compare(0, prefix.size(), prefix) == 0) {
                const char a = name.back();
                if (a >= 'x' && a <= 'z') return a - 'x';
            }
            return -1;
        };
        if (int a = root_axis("root_pos_"); a >= 0) {
            for (Eigen::Index f = 0; f < n; ++f) out(f, col) = motion.root_position[static_cast<std::size_t>(f)][a];
        } else if (int b = root_axis("root_vel_"); b >= 0) {
            for (Eigen::Index f = 0; f < n; ++f) out(f, col) = motion.root_linear_velocity[static_cast<std::size_t>(f)][b];
        } else {
            auto it = std::find(motion.joint_names.begin(), motion.joint_names.end(), name);
            if (it == motion.joint_names.end()) fail_data("motion has no channel '" + name + "'");
            out.col(col) = motion.joint_angles.col(it - motion.joint_names.begin());
        }
    }
    return out;
}

Eigen::MatrixXd window_frames(const Eigen::MatrixXd& channels, std::size_t window)
{
    if (window == 0) fail_usage("window must be at least 1");
    const auto frames = static_cast<std::size_t>(channels.rows());
    if (frames < window)
        fail_data("clip of " + std::to_string(frames) + " frames is shorter than the window of " + std::to_string(window));
    const Eigen::Index c = channels.cols();
    const auto w = static_cast<Eigen::Index>(window);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(frames - window + 1), w * c);
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        for (Eigen::Index k = 0; k < w; ++k) out.block(r, k * c, 1, c) = channels.row(r + k);
    return out;
}

Eigen::MatrixXd unwindow_frames(const Eigen::MatrixXd& features, std::size_t window, std::size_t channels)
{
    if (window == 0) fail_usage("window must be at least 1");
    const auto c = static_cast<Eigen::Index>(channels);
    const auto w = static_cast<Eigen::Index>(window);
    if (features.cols() != w * c) fail_data("feature width does not match window * channels");
    if (features.rows() == 0) return Eigen::MatrixXd(0, c);
    const Eigen::Index frames = features.rows() + w - 1;
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(frames, c);
    Eigen::VectorXd count = Eigen::VectorXd::Zero(frames);
    for (Eigen::Index r = 0; r < features.rows(); ++r)
        for (Eigen::Index k = 0; k < w; ++k) {
            sum.row(r + k) += features.block(r, k * c, 1, c);
            count[r + k] += 1.0;
        }
    for (Eigen::Index f = 0; f < frames; ++f) sum.row(f) /= count[f];
    return sum;
}

Normalization fit_normalization(const Eigen::MatrixXd& features)
{
    if (features.rows() == 0) fail_data("cannot fit normalization on an empty dataset");
    Normalization n;
    n.mean = features.colwise().mean().transpose();
    n.scale.resize(features.cols());
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        const double var = (features.col(c).array() - n.mean[c]).square().mean();
        const double sd = std::sqrt(var);
        n.scale[c] = sd > 1e-8 ? sd : 1.0;
    }
    return n;
}

Eigen::MatrixXd normalize(const Eigen::MatrixXd& features, const Normalization& norm)
{
    if (features.cols() != norm.mean.size()) fail_data("feature dimension does not match the normalization");
    return (features.rowwise() - norm.mean.transpose()).array().rowwise() / norm.scale.transpose().array();
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& features, const Normalization& norm)
{
    if (features.cols() != norm.mean.size()) fail_data("feature dimension does not match the normalization");
    Eigen::MatrixXd out = features.array().rowwise() * norm.scale.transpose().array();
    out.rowwise() += norm.mean.transpose();
    return out;
}

void validate(const RvqModel& m)
{
    if (m.layers.empty()) fail_data("RVQ model needs at least one layer");
    if (m.window == 0) fail_data("RVQ window must be at least 1");
    const auto d = static_cast<Eigen::Index>(m.dim());
    if (m.normalization.scale.size() != d) fail_data("RVQ normalization vectors differ in length");
    if (!(m.normalization.scale.array() > 0.0).all() || !m.normalization.scale.allFinite() || !m.normalization.mean.allFinite())
        fail_data("RVQ normalization must be finite with positive scale");
    if (m.part != BodyPart::Audio && m.channels.size() * m.window != m.dim())
        fail_data("RVQ dimension does not match channels * window");
    for (const auto& l : m.layers) {
        if (l.codes.rows() < 1 || l.codes.cols() != d) fail_data("RVQ codebook has the wrong shape");
        if (!l.codes.allFinite()) fail_data("RVQ codebook contains non-finite values");
        if (l.usage_counts.size() != l.size()) fail_data("RVQ usage counters do not match the codebook");
    }
}

Eigen::MatrixXd frame_features(const RobotMotion& motion, const std::vector<std::string>& channels, std::size_t window,
                               const Normalization& norm)
{
    return normalize(window_frames(select_channels(motion, channels), window), norm);
}

Eigen::MatrixXd frame_features(const RvqModel& model, const RobotMotion& motion)
{
    return frame_features(motion, model.channels, model.window, model.normalization);
}

std::vector<Codebook> train_codebooks(const Eigen::MatrixXd& features, const RvqTrainOptions& options)
{
    if (options.layers == 0) fail_usage("RVQ needs at least one layer");
    if (options.codes == 0) fail_usage("RVQ needs at least one code per layer");
    if (features.rows() == 0) fail_data("RVQ training on an empty dataset");
    if (options.codes > static_cast<std::size_t>(features.rows()))
        fail_data("codes per layer (" + std::to_string(options.codes) + ") exceed the dataset size (" +
                  std::to_string(features.rows()) + ")");
    std::vector<Codebook> layers;
    Eigen::MatrixXd residual = features;
    for (std::size_t l = 0; l < options.layers; ++l) {
        KMeansOptions ko;
        ko.clusters = options.codes;
        ko.seed = options.seed + 0x9E3779B97F4A7C15ULL * (l + 1);
        ko.max_iterations = options.max_iterations;
        auto km = kmeans(residual, ko);
        Codebook cb;
        cb.codes = std::move(km.centroids);
        cb.usage_counts.assign(km.usage.begin(), km.usage.end());
        for (Eigen::Index i = 0; i < residual.rows(); ++i)
            residual.row(i) -= cb.codes.row(static_cast<Eigen::Index>(km.assignment[static_cast<std::size_t>(i)]));
        layers.push_back(std::move(cb));
    }
    return layers;
}

RvqModel train_rvq(const std::vector<RobotMotion>& corpus, BodyPart part, std::size_t window,
                   const RvqTrainOptions& options)
{
    if (corpus.empty()) fail_data("RVQ training corpus is empty");
    RvqModel m;
    m.part = part;
    m.window = window;
    m.channels = part_channels(corpus.front().joint_names, part);
    std::vector<Eigen::MatrixXd> framed;
    Eigen::Index rows = 0;
    for (const auto& motion : corpus) {
        framed.push_back(window_frames(select_channels(motion, m.channels), window));
        rows += framed.back().rows();
    }
    Eigen::MatrixXd all(rows, framed.front().cols());
    Eigen::Index r = 0;
    for (const auto& f : framed) {
        all.middleRows(r, f.rows()) = f;
        r += f.rows();
    }
    m.normalization = fit_normalization(all);
    m.layers = train_codebooks(normalize(all, m.normalization), options);
    return m;
}

TokenStack encode(const RvqModel& model, const Eigen::MatrixXd& features)
{
    validate(model);
    if (features.cols() != static_cast<Eigen::Index>(model.dim()))
        fail_data("feature dimension " + std::to_string(features.cols()) + " does not match model dimension " +
                  std::to_string(model.dim()));
    TokenStack s;
    s.part = model.part;
    s.tokens.resize(features.rows(), static_cast<Eigen::Index>(model.layer_count()));
    for (Eigen::Index f = 0; f < features.rows(); ++f) {
        Eigen::VectorXd residual = features.row(f).transpose();
        for (std::size_t l = 0; l < model.layer_count(); ++l) {
            const auto k = nearest_code(model.layers[l].codes, residual);
            s.tokens(f, static_cast<Eigen::Index>(l)) = static_cast<int>(k);
            residual -= model.layers[l].codes.row(static_cast<Eigen::Index>(k)).transpose();
        }
    }
    return s;
}

Eigen::MatrixXd decode_latent(const RvqModel& model, const TokenStack& stack)
{
    validate(model);
    if (stack.layer_count() == 0) fail_data("cannot decode an empty token stack");
    if (stack.layer_count() > model.layer_count())
        fail_data("token stack has more layers than the model");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(stack.tokens.rows(), static_cast<Eigen::Index>(model.dim()));
    for (Eigen::Index f = 0; f < stack.tokens.rows(); ++f)
        for (std::size_t l = 0; l < stack.layer_count(); ++l) {
            const int k = stack.tokens(f, static_cast<Eigen::Index>(l));
            if (k < 0 || static_cast<std::size_t>(k) >= model.layers[l].size())
                fail_data("token " + std::to_string(k) + " out of range at frame " + std::to_string(f) + ", layer " +
                          std::to_string(l));
            out.row(f) += model.layers[l].codes.row(k);
        }
    return out;
}

Eigen::MatrixXd decode_channels(const RvqModel& model, const TokenStack& stack)
{
    return unwindow_frames(denormalize(decode_latent(model, stack), model.normalization), model.window,
                           model.channels.size());
}

std::vector<double> reconstruction_error(const RvqModel& model, const Eigen::MatrixXd& features)
{
    const TokenStack s = encode(model, features);
    std::vector<double> curve;
    Eigen::MatrixXd residual = features;
    const double count = static_cast<double>(std::max<Eigen::Index>(1, features.size()));
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        for (Eigen::Index f = 0; f < features.rows(); ++f)
            residual.row(f) -= model.layers[l].codes.row(s.tokens(f, static_cast<Eigen::Index>(l)));
        curve.push_back(residual.squaredNorm() / count);
    }
    return curve;
}

RobotMotion motion_from_channels(const std::vector<std::string>& joint_names, double frame_rate,
                                 const std::vector<std::pair<std::vector<std::string>, Eigen::MatrixXd>>& parts)
{
    RobotMotion m;
    m.frame_rate = frame_rate;
    m.joint_names = joint_names;
    Eigen::Index frames = -1;
    for (const auto& [names, values] : parts) {
        if (static_cast<std::size_t>(values.cols()) != names.size()) fail_data("decoded channel count mismatch");
        if (frames >= 0 && values.rows() != frames) fail_data("decoded parts have different frame counts");
        frames = values.rows();
    }
    m.resize(static_cast<std::size_t>(std::max<Eigen::Index>(frames, 0)));
    std::set<std::string> seen;
    for (const auto& [names, values] : parts) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (!seen.insert(names[c]).second) fail_data("channel '" + names[c] + "' decoded by two models");
            const auto col = static_cast<Eigen::Index>(c);
            if (names[c] == "root_pos_z") {
                for (Eigen::Index f = 0; f < values.rows(); ++f) m.root_position[static_cast<std::size_t>(f)].z() = values(f, col);
                continue;
            }
            auto it = std::find(joint_names.begin(), joint_names.end(), names[c]);
            if (it == joint_names.end()) fail_data("decoded channel '" + names[c] + "' is not a robot joint");
            m.joint_angles.col(it - joint_names.begin()) = values.col(col);
        }
    }
    const std::size_t n = m.frame_count();
    for (std::size_t t = 0; n >= 2 && t < n; ++t) {
        const std::size_t a = t == 0 ? 0 : t - 1, b = t + 1 == n ? t : t + 1;
        m.root_linear_velocity[t] = (m.root_position[b] - m.root_position[a]) * (frame_rate / static_cast<double>(b - a));
    }
    return m;
}

// ---- binary model file ----------------------------------------------------------

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v)
{
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const
    {
        if (bytes.size() - pos < n) fail_data("RVQ model file is truncated");
    }
    std::uint64_t uint(int width)
    {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(bytes[pos++]) << (8 * i);
        return v;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
    std::uint64_t u64() { return uint(8); }
    double f64() { return std::bit_cast<double>(uint(8)); }
};

} // namespace

std::vector<std::uint8_t> serialize_rvq(const RvqModel& model)
{
    validate(model);
    std::vector<std::uint8_t> out = {'R', 'V', 'Q', '1'};
    const auto d = static_cast<Eigen::Index>(model.dim());
    put_u32(out, static_cast<std::uint32_t>(model.layer_count()));
    put_u32(out, static_cast<std::uint32_t>(model.codes_per_layer()));
    put_u32(out, static_cast<std::uint32_t>(d));
    put_u32(out, static_cast<std::uint32_t>(model.window));
    for (Eigen::Index i = 0; i < d; ++i) put_f64(out, model.normalization.mean[i]);
    for (Eigen::Index i = 0; i < d; ++i) put_f64(out, model.normalization.scale[i]);
    for (const auto& l : model.layers) {
        if (l.size() != model.codes_per_layer()) fail_data("RVQ layers must share the codebook size");
        for (Eigen::Index r = 0; r < l.codes.rows(); ++r)
            for (Eigen::Index c = 0; c < d; ++c) put_f64(out, l.codes(r, c));
    }
    put_u32(out, static_cast<std::uint32_t>(model.part));
    put_u32(out, static_cast<std::uint32_t>(model.channels.size()));
    for (const auto& name : model.channels) {
        put_u32(out, static_cast<std::uint32_t>(name.size()));
        out.insert(out.end(), name.begin(), name.end());
    }
    for (const auto& l : model.layers)
        for (auto u : l.usage_counts) put_u64(out, u);
    return out;
}

RvqModel deserialize_rvq(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 4 || std::memcmp(bytes.data(), "RVQ1", 4) != 0) fail_data("not an RVQ model file (bad magic)");
    Reader in{bytes, 4};
    const std::uint32_t L = in.u32(), K = in.u32(), D = in.u32(), W = in.u32();
    if (L == 0 || K == 0 || D == 0 || W == 0) fail_data("RVQ model header has a zero dimension");
    // Guards against absurd headers before allocating.
    in.need((2ULL * D + static_cast<std::uint64_t>(L) * K * D) * 8);
    RvqModel m;
    m.window = W;
    m.normalization.mean.resize(D);
    m.normalization.scale.resize(D);
    for (std::uint32_t i = 0; i < D; ++i) m.normalization.mean[i] = in.f64();
    for (std::uint32_t i = 0; i < D; ++i) m.normalization.scale[i] = in.f64();
    m.layers.resize(L);
    for (auto& l : m.layers) {
        l.codes.resize(K, D);
        for (std::uint32_t r = 0; r < K; ++r)
            for (std::uint32_t c = 0; c < D; ++c) l.codes(r, c) = in.f64();
    }
    const std::uint32_t part = in.u32();
    if (part > static_cast<std::uint32_t>(BodyPart::Audio)) fail_data("RVQ model has an unknown part tag");
    m.part = static_cast<BodyPart>(part);
    const std::uint32_t names = in.u32();
    if (names > D) fail_data("RVQ model lists more channels than dimensions");
    for (std::uint32_t i = 0; i < names; ++i) {
        const std::uint32_t len = in.u32();
        in.need(len);
        m.channels.emplace_back(reinterpret_cast<const char*>(bytes.data() + in.pos), len);
        in.pos += len;
    }
    for (auto& l : m.layers) {
        l.usage_counts.resize(K);
        for (auto& u : l.usage_counts) u = in.u64();
    }
    if (in.pos != bytes.size()) fail_data("RVQ model file has trailing bytes");
    validate(m);
    return m;
}

void save_rvq(const RvqModel& model, const std::string& path)
{
    const auto bytes = serialize_rvq(model);
    text::write_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

RvqModel load_rvq(const std::string& path)
{
    const auto bytes = text::read_binary(path);
    return deserialize_rvq(bytes);
}

// ---- token text -----------------------------------------------------------------

std::string write_tokens(const TokenStack& stack)
{
    std::string out = "# part " + std::string(to_string(stack.part)) + "\n";
    for (Eigen::Index f = 0; f < stack.tokens.rows(); ++f) {
        for (Eigen::Index l = 0; l < stack.tokens.cols(); ++l) {
            if (l) out += ' ';
            out += std::to_string(stack.tokens(f, l));
        }
        out += '\n';
    }
    return out;
}

TokenStack parse_tokens(std::string_view src)
{
    TokenStack s;
    std::vector<std::vector<int>> rows;
    std::size_t line_no = 0;
    for (auto line : text::split(src, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            auto t = text::split_ws(line.substr(1));
            if (t.size() == 2 && t[0] == "part") s.part = parse_body_part(t[1]);
            continue;
        }
        std::vector<int> row;
        for (auto tok : text::split_ws(line)) {
            const auto v = text::parse_int(tok, "token");
            if (v < 0 || v > std::numeric_limits<int>::max())
                fail_data("token line " + std::to_string(line_no) + ": negative or oversized index");
            row.push_back(static_cast<int>(v));
        }
        if (!rows.empty() && row.size() != rows.front().size())
            fail_data("token line " + std::to_string(line_no) + ": inconsistent layer count");
        rows.push_back(std::move(row));
    }
    const auto layers = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    s.tokens.resize(static_cast<Eigen::Index>(rows.size()), layers);
    for (std::size_t f = 0; f < rows.size(); ++f)
        for (Eigen::Index l = 0; l < layers; ++l) s.tokens(static_cast<Eigen::Index>(f), l) = rows[f][static_cast<std::size_t>(l)];
    return s;
}

TokenStack load_tokens(const std::string& path) { return parse_tokens(text::read_file(path)); }

TokenStack concat_parts(const TokenStack& body, const TokenStack& hand)
{
    if (body.tokens.rows() != hand.tokens.rows()) fail_data("body and hand token stacks differ in length");
    TokenStack s;
    s.part = BodyPart::Combined;
    s.tokens.resize(body.tokens.rows(), body.tokens.cols() + hand.tokens.cols());
    s.tokens << body.tokens, hand.tokens;
    return s;
}

std::pair<TokenStack, TokenStack> split_parts(const TokenStack& combined, std::size_t body_layers)
{
    const auto b = static_cast<Eigen::Index>(body_layers);
    if (b > combined.tokens.cols()) fail_data("combined stack has fewer layers than the body model");
    TokenStack body, hand;
    body.part = BodyPart::Body;
    hand.part = BodyPart::Hand;
    body.tokens = combined.tokens.leftCols(b);
    hand.tokens = combined.tokens.rightCols(combined.tokens.cols() - b);
    return {body, hand};
}

} // namespace grk

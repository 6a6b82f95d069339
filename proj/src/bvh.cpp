#include "grk/bvh.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

namespace grk {

std::string_view to_string(BvhChannel c)
{
    switch (c) {
    case BvhChannel::Xposition: return "Xposition";
    case BvhChannel::Yposition: return "Yposition";
    case BvhChannel::Zposition: return "Zposition";
    case BvhChannel::Xrotation: return "Xrotation";
    case BvhChannel::Yrotation: return "Yrotation";
    case BvhChannel::Zrotation: return "Zrotation";
    }
    return "?";
}

bool is_rotation(BvhChannel c)
{
    return c == BvhChannel::Xrotation || c == BvhChannel::Yrotation || c == BvhChannel::Zrotation;
}

int channel_axis(BvhChannel c)
{
    switch (c) {
    case BvhChannel::Xposition:
    case BvhChannel::Xrotation: return 0;
    case BvhChannel::Yposition:
    case BvhChannel::Yrotation: return 1;
    default: return 2;
    }
}

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

std::size_t count_channels(const BvhJoint& j)
{
    std::size_t n = j.channels.size();
    for (const auto& c : j.children) n += count_channels(c);
    return n;
}

struct Token {
    std::string_view text;
    std::size_t line;
};

class Lexer {
public:
    explicit Lexer(std::string_view src)
    {
        std::size_t line = 1;
        std::size_t i = 0;
        while (i < src.size()) {
            char c = src[i];
            if (c == '\n') {
                ++line;
                ++i;
            } else if (c == ' ' || c == '\t' || c == '\r') {
                ++i;
            } else if (c == '{' || c == '}') {
                tokens_.push_back({src.substr(i, 1), line});
                ++i;
            } else {
                std::size_t j = i;
                while (j < src.size() && src[j] != ' ' && src[j] != '\t' && src[j] != '\r' && src[j] != '\n' &&
                       src[j] != '{' && src[j] != '}')
                    ++j;
                tokens_.push_back({src.substr(i, j - i), line});
                i = j;
            }
        }
        end_line_ = line;
    }

    bool done() const { return pos_ >= tokens_.size(); }
    const Token& peek() const
    {
        if (done()) error("unexpected end of file");
        return tokens_[pos_];
    }
    Token next()
    {
        const Token& t = peek();
        ++pos_;
        return t;
    }
    void expect(std::string_view word)
    {
        Token t = next();
        if (t.text != word)
            error("expected '" + std::string(word) + "' but found '" + std::string(t.text) + "'", t.line);
    }
    double number(std::string_view what)
    {
        Token t = next();
        try {
            return text::parse_double(t.text, what);
        } catch (const Error&) {
            error("non-numeric token '" + std::string(t.text) + "' for " + std::string(what), t.line);
        }
    }
    [[noreturn]] void error(const std::string& msg, std::size_t line = 0) const
    {
        if (line == 0) line = done() ? end_line_ : tokens_[pos_].line;
        fail_data("BVH syntax error at line " + std::to_string(line) + ": " + msg);
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    std::size_t end_line_ = 1;
};

BvhChannel parse_channel(const Token& t, const Lexer& lex)
{
    static const std::pair<std::string_view, BvhChannel> names[] = {
        {"Xposition", BvhChannel::Xposition}, {"Yposition", BvhChannel::Yposition},
        {"Zposition", BvhChannel::Zposition}, {"Xrotation", BvhChannel::Xrotation},
        {"Yrotation", BvhChannel::Yrotation}, {"Zrotation", BvhChannel::Zrotation},
    };
    for (const auto& [name, ch] : names)
        if (t.text == name) return ch;
    lex.error("unknown channel '" + std::string(t.text) + "'", t.line);
}

Eigen::Vector3d parse_offset(Lexer& lex)
{
    lex.expect("OFFSET");
    Eigen::Vector3d v;
    for (int k = 0; k < 3; ++k) v[k] = lex.number("OFFSET");
    return v;
}

BvhJoint parse_joint(Lexer& lex, std::string name, std::set<std::string>& names)
{
    BvhJoint joint;
    joint.name = std::move(name);
    if (!names.insert(joint.name).second) lex.error("duplicate joint name '" + joint.name + "'");
    lex.expect("{");
    joint.offset = parse_offset(lex);
    if (lex.peek().text == "CHANNELS") {
        lex.next();
        Token count_tok = lex.next();
        long long count = 0;
        try {
            count = text::parse_int(count_tok.text, "CHANNELS");
        } catch (const Error&) {
            lex.error("invalid channel count '" + std::string(count_tok.text) + "'", count_tok.line);
        }
        if (count != 0 && count != 3 && count != 6)
            lex.error("channel count must be 0, 3 or 6, got " + std::to_string(count), count_tok.line);
        for (long long k = 0; k < count; ++k) joint.channels.push_back(parse_channel(lex.next(), lex));
    }
    while (lex.peek().text != "}") {
        Token t = lex.next();
        if (t.text == "JOINT") {
            Token name_tok = lex.next();
            joint.children.push_back(parse_joint(lex, std::string(name_tok.text), names));
        } else if (t.text == "End") {
            lex.expect("Site");
            BvhJoint site;
            site.is_end_site = true;
            site.name = joint.name + "_End";
            if (!names.insert(site.name).second) lex.error("duplicate joint name '" + site.name + "'");
            lex.expect("{");
            site.offset = parse_offset(lex);
            lex.expect("}");
            joint.children.push_back(std::move(site));
        } else {
            lex.error("unexpected token '" + std::string(t.text) + "'", t.line);
        }
    }
    lex.expect("}");
    return joint;
}

void rest_extent(const BvhJoint& j, double y, double& lo, double& hi)
{
    double here = y + j.offset.y();
    lo = std::min(lo, here);
    hi = std::max(hi, here);
    for (const auto& c : j.children) rest_extent(c, here, lo, hi);
}

void scale_offsets(BvhJoint& j, double s)
{
    j.offset *= s;
    for (auto& c : j.children) scale_offsets(c, s);
}

void collect_channels(const BvhJoint& j, std::vector<BvhChannel>& out)
{
    out.insert(out.end(), j.channels.begin(), j.channels.end());
    for (const auto& c : j.children) collect_channels(c, out);
}

void validate_joint(const BvhJoint& j, std::set<std::string>& names)
{
    if (!names.insert(j.name).second) fail_data("duplicate BVH joint name '" + j.name + "'");
    const auto n = j.channels.size();
    if (n != 0 && n != 3 && n != 6) fail_data("joint '" + j.name + "' has " + std::to_string(n) + " channels");
    if (j.is_end_site && (n != 0 || !j.children.empty()))
        fail_data("end site '" + j.name + "' must have no channels and no children");
    if (!j.offset.allFinite()) fail_data("joint '" + j.name + "' has a non-finite offset");
    for (const auto& c : j.children) validate_joint(c, names);
}

void write_joint(std::ostringstream& os, const BvhJoint& j, int depth, bool root, double inv_scale)
{
    std::string indent(static_cast<std::size_t>(depth), '\t');
    if (j.is_end_site) {
        os << indent << "End Site\n";
    } else {
        os << indent << (root ? "ROOT " : "JOINT ") << j.name << "\n";
    }
    os << indent << "{\n";
    os << indent << "\tOFFSET";
    for (int k = 0; k < 3; ++k) os << ' ' << text::format_double(j.offset[k] * inv_scale);
    os << "\n";
    if (!j.is_end_site) {
        os << indent << "\tCHANNELS " << j.channels.size();
        for (auto c : j.channels) os << ' ' << to_string(c);
        os << "\n";
    }
    for (const auto& c : j.children) write_joint(os, c, depth + 1, false, inv_scale);
    os << indent << "}\n";
}

void flatten_into(const BvhJoint& j, int parent, std::size_t& column, std::vector<FlatJoint>& out)
{
    int self = static_cast<int>(out.size());
    out.push_back({&j, parent, column});
    column += j.channels.size();
    for (const auto& c : j.children) flatten_into(c, self, column, out);
}

} // namespace

std::size_t BvhDocument::total_channels() const { return count_channels(root); }

std::vector<FlatJoint> flatten(const BvhDocument& doc)
{
    std::vector<FlatJoint> out;
    std::size_t column = 0;
    flatten_into(doc.root, -1, column, out);
    return out;
}

void validate(const BvhDocument& doc)
{
    std::set<std::string> names;
    if (doc.root.is_end_site) fail_data("BVH root cannot be an end site");
    validate_joint(doc.root, names);
    if (!(doc.frame_time > 0.0) || !std::isfinite(doc.frame_time)) fail_data("BVH frame time must be positive");
    if (!(doc.unit_scale > 0.0)) fail_data("BVH unit scale must be positive");
    if (static_cast<std::size_t>(doc.frames.cols()) != doc.total_channels() && doc.frames.rows() > 0)
        fail_data("BVH frame width " + std::to_string(doc.frames.cols()) + " does not match " +
                  std::to_string(doc.total_channels()) + " hierarchy channels");
    if (!doc.frames.allFinite()) fail_data("BVH frames contain non-finite values");
}

BvhDocument parse_bvh(std::string_view src, const BvhReadOptions& options)
{
    Lexer lex(src);
    BvhDocument doc;
    std::set<std::string> names;
    lex.expect("HIERARCHY");
    lex.expect("ROOT");
    Token root_name = lex.next();
    doc.root = parse_joint(lex, std::string(root_name.text), names);

    lex.expect("MOTION");
    lex.expect("Frames:");
    Token count_tok = lex.next();
    long long frames = 0;
    try {
        frames = text::parse_int(count_tok.text, "Frames");
    } catch (const Error&) {
        lex.error("invalid frame count '" + std::string(count_tok.text) + "'", count_tok.line);
    }
    if (frames < 0) lex.error("negative frame count", count_tok.line);
    lex.expect("Frame");
    lex.expect("Time:");
    Token ft = lex.peek();
    doc.frame_time = lex.number("Frame Time");
    if (!(doc.frame_time > 0.0)) lex.error("frame time must be positive", ft.line);

    std::vector<BvhChannel> channels;
    collect_channels(doc.root, channels);
    const std::size_t width = channels.size();

    double lo = 0.0, hi = 0.0;
    rest_extent(doc.root, 0.0, lo, hi);
    doc.unit_scale = options.unit_scale.value_or(hi - lo > 10.0 ? 0.01 : 1.0);
    if (!(doc.unit_scale > 0.0)) fail_usage("BVH unit scale must be positive");
    scale_offsets(doc.root, doc.unit_scale);

    doc.frames.resize(frames, static_cast<Eigen::Index>(width));
    for (long long f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < width; ++c) {
            if (lex.done())
                lex.error("frame " + std::to_string(f) + " has " + std::to_string(c) + " values, hierarchy declares " +
                          std::to_string(width) + " channels");
            double v = lex.number("frame value");
            doc.frames(f, static_cast<Eigen::Index>(c)) = is_rotation(channels[c]) ? v * kDegToRad : v * doc.unit_scale;
        }
    }
    if (!lex.done())
        lex.error("frame data has more values than " + std::to_string(frames) + " frames x " + std::to_string(width) +
                  " channels");
    return doc;
}

std::string write_bvh(const BvhDocument& doc)
{
    validate(doc);
    std::ostringstream os;
    const double inv_scale = 1.0 / doc.unit_scale;
    os << "HIERARCHY\n";
    write_joint(os, doc.root, 0, true, inv_scale);
    os << "MOTION\n";
    os << "Frames: " << doc.frame_count() << "\n";
    os << "Frame Time: " << text::format_double(doc.frame_time) << "\n";

    std::vector<BvhChannel> channels;
    collect_channels(doc.root, channels);
    for (Eigen::Index f = 0; f < doc.frames.rows(); ++f) {
        for (std::size_t c = 0; c < channels.size(); ++c) {
            double v = doc.frames(f, static_cast<Eigen::Index>(c));
            v = is_rotation(channels[c]) ? v / kDegToRad : v * inv_scale;
            if (c) os << ' ';
            os << text::format_double(v);
        }
        os << "\n";
    }
    return os.str();
}

} // namespace grk

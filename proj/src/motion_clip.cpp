#include "grk/motion_clip.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace grk {

int MotionClip::find_channel(std::string_view name) const
{
    for (std::size_t i = 0; i < channel_names.size(); ++i)
        if (channel_names[i] == name) return static_cast<int>(i);
    return -1;
}

void validate(const MotionClip& clip)
{
    if (!(clip.frame_rate > 0.0) || !std::isfinite(clip.frame_rate)) fail_data("clip frame rate must be positive");
    if (static_cast<std::size_t>(clip.values.cols()) != clip.channel_names.size())
        fail_data("clip has " + std::to_string(clip.channel_names.size()) + " channel names but " +
                  std::to_string(clip.values.cols()) + " value columns");
    std::set<std::string> seen;
    for (const auto& n : clip.channel_names)
        if (!seen.insert(n).second) fail_data("duplicate clip channel '" + n + "'");
}

std::string write_clip(const MotionClip& clip)
{
    validate(clip);
    std::ostringstream os;
    os << "frame_rate " << text::format_double(clip.frame_rate);
    for (const auto& n : clip.channel_names) os << ' ' << n;
    os << '\n';
    for (Eigen::Index r = 0; r < clip.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < clip.values.cols(); ++c) {
            if (c) os << ' ';
            os << text::format_double(clip.values(r, c));
        }
        os << '\n';
    }
    return os.str();
}

MotionClip parse_clip(std::string_view src)
{
    MotionClip clip;
    std::vector<std::vector<double>> rows;
    bool header = false;
    std::size_t line_no = 0;
    for (std::string_view line : text::split(src, '\n')) {
        ++line_no;
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        auto toks = text::split_ws(line);
        if (!header) {
            if (toks.size() < 2 || toks[0] != "frame_rate") fail_data("clip header must start with 'frame_rate <hz>'");
            clip.frame_rate = text::parse_double(toks[1], "frame_rate");
            for (std::size_t i = 2; i < toks.size(); ++i) clip.channel_names.emplace_back(toks[i]);
            header = true;
            continue;
        }
        if (toks.size() != clip.channel_names.size())
            fail_data("clip line " + std::to_string(line_no) + " has " + std::to_string(toks.size()) +
                      " values, expected " + std::to_string(clip.channel_names.size()));
        std::vector<double> row;
        row.reserve(toks.size());
        for (auto t : toks) row.push_back(text::parse_double(t, "clip value"));
        rows.push_back(std::move(row));
    }
    if (!header) fail_data("clip file is empty");
    clip.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(clip.channel_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            clip.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    validate(clip);
    return clip;
}

MotionClip resample_clip(const MotionClip& clip, double target_rate)
{
    if (!(target_rate > 0.0) || !std::isfinite(target_rate)) fail_usage("target frame rate must be positive");
    if (clip.frame_count() == 0) fail_data("cannot resample an empty clip");
    MotionClip out;
    out.channel_names = clip.channel_names;
    out.frame_rate = target_rate;
    if (target_rate == clip.frame_rate) {
        out.values = clip.values;
        return out;
    }
    const double duration = static_cast<double>(clip.frame_count() - 1) / clip.frame_rate;
    // Small tolerance so that exact multiples do not lose their last frame.
    const auto frames = static_cast<Eigen::Index>(std::floor(duration * target_rate + 1e-9)) + 1;
    out.values.resize(frames, clip.values.cols());
    const Eigen::Index last = clip.values.rows() - 1;
    for (Eigen::Index f = 0; f < frames; ++f) {
        const double src = static_cast<double>(f) * clip.frame_rate / target_rate;
        auto i0 = std::min<Eigen::Index>(static_cast<Eigen::Index>(std::floor(src)), last);
        const Eigen::Index i1 = std::min<Eigen::Index>(i0 + 1, last);
        const double t = std::clamp(src - static_cast<double>(i0), 0.0, 1.0);
        out.values.row(f) = clip.values.row(i0) + t * (clip.values.row(i1) - clip.values.row(i0));
    }
    return out;
}

} // namespace grk

#include "grk/wav.hpp"

#include "grk/error.hpp"
#include "grk/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <optional>

namespace grk {

namespace {

std::uint32_t u32(std::span<const std::uint8_t> b, std::size_t at)
{
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t u16(std::span<const std::uint8_t> b, std::size_t at)
{
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag)
{
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v)
{
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v)
{
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

struct Format {
    std::uint16_t code;
    std::uint16_t channels;
    std::uint32_t rate;
    std::uint16_t bits;
};

} // namespace

AudioBuffer read_wav(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
        fail_data("not a RIFF/WAVE file");

    std::optional<Format> fmt;
    std::optional<std::span<const std::uint8_t>> data;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t size = u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        if (size > bytes.size() - body) fail_data("truncated WAV chunk at byte " + std::to_string(pos));
        if (tag_is(bytes, pos, "fmt ")) {
            if (size < 16) fail_data("WAV fmt chunk too short");
            Format f{u16(bytes, body), u16(bytes, body + 2), u32(bytes, body + 4), u16(bytes, body + 14)};
            // WAVE_FORMAT_EXTENSIBLE carries the real code in the sub-format GUID.
            if (f.code == 0xFFFE && size >= 26) f.code = u16(bytes, body + 24);
            fmt = f;
        } else if (tag_is(bytes, pos, "data")) {
            data = bytes.subspan(body, size);
        }
        pos = body + size + (size & 1u);
    }
    if (pos < bytes.size() && !data) fail_data("truncated WAV chunk header");
    if (!fmt) fail_data("WAV file has no fmt chunk");
    if (!data) fail_data("WAV file has no data chunk");
    if (fmt->channels == 0) fail_data("WAV file declares zero channels");
    if (fmt->rate == 0) fail_data("WAV file declares a zero sample rate");

    std::size_t sample_bytes = 0;
    if (fmt->code == 1 && fmt->bits == 16)
        sample_bytes = 2;
    else if (fmt->code == 3 && fmt->bits == 32)
        sample_bytes = 4;
    else
        fail_data("unsupported WAV encoding (format " + std::to_string(fmt->code) + ", " +
                  std::to_string(fmt->bits) + " bits); only PCM16 and float32 are accepted");

    const std::size_t frame_bytes = sample_bytes * fmt->channels;
    if (data->size() % frame_bytes != 0) fail_data("truncated WAV data chunk");
    const std::size_t frames = data->size() / frame_bytes;

    AudioBuffer out;
    out.sample_rate = fmt->rate;
    out.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (std::size_t c = 0; c < fmt->channels; ++c) {
            const std::size_t at = i * frame_bytes + c * sample_bytes;
            double v;
            if (sample_bytes == 2) {
                v = static_cast<std::int16_t>(u16(*data, at)) / 32768.0;
            } else {
                std::uint32_t raw = u32(*data, at);
                float f;
                std::memcpy(&f, &raw, sizeof f);
                v = std::isfinite(f) ? static_cast<double>(f) : 0.0;
            }
            acc += std::clamp(v, -1.0, 1.0);
        }
        out.samples[i] = acc / fmt->channels;
    }
    return out;
}

AudioBuffer read_wav_file(const std::string& path)
{
    auto bytes = text::read_binary(path);
    return read_wav(bytes);
}

std::vector<std::uint8_t> write_wav_pcm16(const AudioBuffer& audio)
{
    const auto n = static_cast<std::uint32_t>(audio.samples.size());
    const auto rate = static_cast<std::uint32_t>(std::lround(audio.sample_rate));
    std::vector<std::uint8_t> out;
    out.reserve(44 + 2 * n);
    out.insert(out.end(), {'R', 'I', 'F', 'F'});
    put_u32(out, 36 + 2 * n);
    out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
    put_u32(out, 16);
    put_u16(out, 1);
    put_u16(out, 1);
    put_u32(out, rate);
    put_u32(out, rate * 2);
    put_u16(out, 2);
    put_u16(out, 16);
    out.insert(out.end(), {'d', 'a', 't', 'a'});
    put_u32(out, 2 * n);
    for (double s : audio.samples) {
        long v = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0);
        put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    }
    return out;
}

} // namespace grk

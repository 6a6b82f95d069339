#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace grk {

struct AudioBuffer {
    double sample_rate = 16000.0;
    // Mono, each sample in [-1, 1].
    std::vector<double> samples;
};

// Accepts RIFF/WAVE with PCM 16-bit (format 1) or IEEE float 32-bit (format 3);
// channels are averaged down to mono.
AudioBuffer read_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav_file(const std::string& path);

// 16-bit PCM mono writer, used for fixtures.
std::vector<std::uint8_t> write_wav_pcm16(const AudioBuffer& audio);

} // namespace grk

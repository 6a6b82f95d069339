#include "grk/audio_features.hpp"

#include "grk/error.hpp"
#include "grk/motion_clip.hpp"
#include "grk/text.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>

namespace grk {

FeatureConfig feature_config_from(const KeyValueConfig& cfg)
{
    FeatureConfig c;
    auto count = [&](const char* key, std::size_t fallback) {
        const auto v = cfg.get_int(key, static_cast<long long>(fallback));
        if (v <= 0) fail_data(std::string(key) + " must be positive");
        return static_cast<std::size_t>(v);
    };
    c.sample_rate = cfg.get_double("sample_rate", c.sample_rate);
    c.fft_size = count("fft_size", c.fft_size);
    c.hop = count("hop", c.hop);
    c.mel_bands = count("mel_bands", c.mel_bands);
    c.mfcc_count = count("mfcc_count", c.mfcc_count);
    c.chroma_bins = count("chroma_bins", c.chroma_bins);
    c.tempogram_window = count("tempogram_window", c.tempogram_window);
    validate(c);
    return c;
}

void validate(const FeatureConfig& c)
{
    if (!(c.sample_rate > 0.0) || !std::isfinite(c.sample_rate)) fail_data("sample_rate must be positive");
    if (c.fft_size < 4 || (c.fft_size & (c.fft_size - 1)) != 0) fail_data("fft_size must be a power of two >= 4");
    if (c.hop == 0 || c.hop > c.fft_size) fail_data("hop must be in [1, fft_size]");
    if (c.mel_bands == 0 || c.mfcc_count == 0 || c.mfcc_count > c.mel_bands)
        fail_data("mfcc_count must be in [1, mel_bands]");
    if (c.chroma_bins != 12) fail_data("chroma_bins must be 12");
    if (c.tempogram_window == 0) fail_data("tempogram_window must be positive");
}

namespace {

// The FFTW planner is not thread safe; execution on a private plan is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};

} // namespace

Eigen::MatrixXd power_spectrogram(const AudioBuffer& audio, const FeatureConfig& config)
{
    validate(config);
    const std::size_t n = config.fft_size;
    if (audio.samples.size() < n)
        fail_data("audio has " + std::to_string(audio.samples.size()) + " samples, fewer than fft_size " + std::to_string(n));
    const std::size_t frames = (audio.samples.size() - n) / config.hop + 1;
    const std::size_t bins = n / 2 + 1;

    std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
    std::unique_ptr<fftw_complex, FftwFree> out(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
    if (!in || !out) throw std::bad_alloc();
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);
    }
    if (!plan) fail_data("FFTW could not create a plan");

    // Periodic Hann, so a bin-centered sine leaks only into its two neighbours.
    std::vector<double> window(n);
    for (std::size_t i = 0; i < n; ++i)
        window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));

    Eigen::MatrixXd spec(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bins));
    for (std::size_t t = 0; t < frames; ++t) {
        const double* src = audio.samples.data() + t * config.hop;
        for (std::size_t i = 0; i < n; ++i) in.get()[i] = src[i] * window[i];
        fftw_execute(plan);
        for (std::size_t k = 0; k < bins; ++k) {
            const double re = out.get()[k][0], im = out.get()[k][1];
            spec(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) = re * re + im * im;
        }
    }
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return spec;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Eigen::MatrixXd mel_filterbank(const FeatureConfig& config)
{
    validate(config);
    const auto bands = static_cast<Eigen::Index>(config.mel_bands);
    const auto bins = static_cast<Eigen::Index>(config.fft_size / 2 + 1);
    const double top = hz_to_mel(config.sample_rate / 2.0);
    std::vector<double> edges(config.mel_bands + 2);
    for (std::size_t i = 0; i < edges.size(); ++i)
        edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(config.mel_bands + 1));

    Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(bands, bins);
    for (Eigen::Index m = 0; m < bands; ++m) {
        const double lo = edges[static_cast<std::size_t>(m)], mid = edges[static_cast<std::size_t>(m) + 1],
                     hi = edges[static_cast<std::size_t>(m) + 2];
        for (Eigen::Index k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * config.sample_rate / static_cast<double>(config.fft_size);
            const double w = std::min((f - lo) / (mid - lo), (hi - f) / (hi - mid));
            if (w > 0.0) fb(m, k) = w;
        }
        if (fb.row(m).sum() <= 0.0)
            fail_data("mel band " + std::to_string(m) + " covers no FFT bin; use fewer mel_bands or a larger fft_size");
    }
    return fb;
}

Eigen::MatrixXd mfcc(const Eigen::MatrixXd& spectrogram, const FeatureConfig& config)
{
    const Eigen::MatrixXd fb = mel_filterbank(config);
    if (spectrogram.cols() != fb.cols()) fail_data("spectrogram width does not match fft_size");
    const Eigen::MatrixXd logmel = (spectrogram * fb.transpose()).array().max(kLogFloor).log().matrix();
    const auto M = static_cast<Eigen::Index>(config.mel_bands);
    const auto C = static_cast<Eigen::Index>(config.mfcc_count);
    Eigen::MatrixXd dct(M, C);
    for (Eigen::Index m = 0; m < M; ++m)
        for (Eigen::Index c = 0; c < C; ++c)
            dct(m, c) = std::cos(std::numbers::pi * static_cast<double>(c) * (static_cast<double>(m) + 0.5) /
                                 static_cast<double>(M));
    return logmel * dct;
}

Eigen::MatrixXd delta(const Eigen::MatrixXd& features)
{
    const Eigen::Index n = features.rows();
    if (n < 3) fail_data("delta needs at least 3 frames");
    Eigen::MatrixXd d(n, features.cols());
    auto at = [&](Eigen::Index t) { return features.row(std::clamp<Eigen::Index>(t, 0, n - 1)); };
    for (Eigen::Index t = 0; t < n; ++t) d.row(t) = ((at(t + 1) - at(t - 1)) + 2.0 * (at(t + 2) - at(t - 2))) / 10.0;
    return d;
}

int pitch_class(double hz)
{
    if (!(hz > 0.0)) fail_usage("pitch class needs a positive frequency");
    const long midi = std::lround(12.0 * std::log2(hz / 440.0)) + 69;
    return static_cast<int>(((midi % 12) + 12) % 12);
}

Eigen::MatrixXd chromagram(const Eigen::MatrixXd& spectrogram, const FeatureConfig& config)
{
    validate(config);
    if (spectrogram.cols() != static_cast<Eigen::Index>(config.fft_size / 2 + 1))
        fail_data("spectrogram width does not match fft_size");
    Eigen::MatrixXd map = Eigen::MatrixXd::Zero(spectrogram.cols(), 12);
    for (Eigen::Index k = 1; k < spectrogram.cols(); ++k)
        map(k, pitch_class(static_cast<double>(k) * config.sample_rate / static_cast<double>(config.fft_size))) = 1.0;
    Eigen::MatrixXd chroma = spectrogram * map;
    for (Eigen::Index t = 0; t < chroma.rows(); ++t) {
        const double norm = chroma.row(t).norm();
        if (norm > 0.0) chroma.row(t) /= norm;
    }
    return chroma;
}

Eigen::VectorXd onset_strength(const Eigen::MatrixXd& spectrogram)
{
    const Eigen::Index n = spectrogram.rows();
    if (n < 2) fail_data("onset strength needs at least 2 frames");
    const Eigen::MatrixXd l = spectrogram.array().log1p().matrix();
    Eigen::VectorXd o = Eigen::VectorXd::Zero(n);
    for (Eigen::Index t = 1; t < n; ++t) o[t] = (l.row(t) - l.row(t - 1)).cwiseMax(0.0).sum();
    return o;
}

Eigen::MatrixXd tempogram(const Eigen::VectorXd& onset, const FeatureConfig& config)
{
    validate(config);
    const auto W = static_cast<Eigen::Index>(config.tempogram_window);
    const Eigen::Index n = onset.size();
    if (n < W) fail_data("onset envelope is shorter than the tempogram window");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, W);
    Eigen::VectorXd seg(2 * W + 1);
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index lo = std::max<Eigen::Index>(0, t - W), hi = std::min<Eigen::Index>(n - 1, t + W);
        const double mean = onset.segment(lo, hi - lo + 1).mean();
        seg.setZero();
        for (Eigen::Index i = lo; i <= hi; ++i) seg[i - (t - W)] = onset[i] - mean;
        const double a0 = seg.squaredNorm();
        if (a0 <= 1e-300) continue;
        for (Eigen::Index lag = 1; lag <= W; ++lag)
            out(t, lag - 1) = seg.head(seg.size() - lag).dot(seg.tail(seg.size() - lag)) / a0;
    }
    return out;
}

FeatureMatrix stack_features(const AudioBuffer& audio, const FeatureConfig& config)
{
    validate(config);
    if (std::abs(audio.sample_rate - config.sample_rate) > 1e-9)
        fail_data("audio sample rate " + text::format_double(audio.sample_rate) + " Hz does not match the configured " +
                  text::format_double(config.sample_rate) + " Hz");
    const Eigen::MatrixXd spec = power_spectrogram(audio, config);
    const Eigen::MatrixXd m = mfcc(spec, config);
    const Eigen::MatrixXd d = delta(m);
    const Eigen::MatrixXd c = chromagram(spec, config);
    const Eigen::VectorXd o = onset_strength(spec);
    const Eigen::MatrixXd tg = tempogram(o, config);

    FeatureMatrix f;
    f.frame_rate = config.frame_rate();
    for (std::size_t i = 0; i < config.mfcc_count; ++i) f.column_names.push_back("mfcc_" + std::to_string(i));
    for (std::size_t i = 0; i < config.mfcc_count; ++i) f.column_names.push_back("delta_" + std::to_string(i));
    for (const char* pc : {"C", "Cs", "D", "Ds", "E", "F", "Fs", "G", "Gs", "A", "As", "B"})
        f.column_names.push_back(std::string("chroma_") + pc);
    f.column_names.emplace_back("onset");
    for (std::size_t i = 1; i <= config.tempogram_window; ++i) f.column_names.push_back("tempo_lag_" + std::to_string(i));
    f.values.resize(spec.rows(), static_cast<Eigen::Index>(f.column_names.size()));
    f.values << m, d, c, o, tg;
    return f;
}

std::string write_features(const FeatureMatrix& features)
{
    MotionClip clip{features.column_names, features.frame_rate, features.values};
    return write_clip(clip);
}

FeatureMatrix parse_features(std::string_view src)
{
    MotionClip clip = parse_clip(src);
    return FeatureMatrix{std::move(clip.channel_names), clip.frame_rate, std::move(clip.values)};
}

FeatureMatrix load_features(const std::string& path) { return parse_features(text::read_file(path)); }

AudioTokens quantize_audio(const FeatureMatrix& features, std::size_t codes, std::uint64_t seed)
{
    if (features.values.rows() == 0) fail_data("cannot quantize empty audio features");
    if (codes > features.frame_count())
        fail_data("audio codebook size " + std::to_string(codes) + " exceeds the frame count " +
                  std::to_string(features.frame_count()));
    AudioTokens out;
    RvqModel& cb = out.codebook;
    cb.part = BodyPart::Audio;
    cb.window = 1;
    cb.channels = features.column_names;
    cb.normalization = fit_normalization(features.values);
    RvqTrainOptions opt;
    opt.layers = 1;
    opt.codes = codes;
    opt.seed = seed;
    cb.layers = train_codebooks(normalize(features.values, cb.normalization), opt);
    out.tokens = assign_audio_tokens(cb, features);
    return out;
}

std::vector<int> assign_audio_tokens(const RvqModel& codebook, const FeatureMatrix& features)
{
    if (codebook.part != BodyPart::Audio) fail_data("model is not an audio codebook");
    if (!codebook.channels.empty() && codebook.channels != features.column_names)
        fail_data("audio feature columns do not match the codebook");
    const TokenStack s = encode(codebook, normalize(features.values, codebook.normalization));
    std::vector<int> tokens(static_cast<std::size_t>(s.tokens.rows()));
    for (Eigen::Index f = 0; f < s.tokens.rows(); ++f) tokens[static_cast<std::size_t>(f)] = s.tokens(f, 0);
    return tokens;
}

std::string write_audio_tokens(const std::vector<int>& tokens)
{
    std::string out;
    for (int t : tokens) out += std::to_string(t) + "\n";
    return out;
}

std::vector<int> parse_audio_tokens(std::string_view src)
{
    std::vector<int> tokens;
    for (auto line : text::split(src, '\n')) {
        line = text::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto v = text::parse_int(line, "audio token");
        if (v < 0 || v > 1'000'000'000) fail_data("audio token out of range");
        tokens.push_back(static_cast<int>(v));
    }
    return tokens;
}

} // namespace grk

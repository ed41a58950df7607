#include "csr/frontend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "csr/error.hpp"

namespace csr {

namespace {

constexpr double kLogFloor = 1e-10;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

void check_sample_rate(int sr) {
    if (sr != 8000 && sr != 16000 && sr != 32000)
        throw DataError("unsupported sample rate: " + std::to_string(sr));
}

}  // namespace

std::vector<std::vector<double>> frame_signal(const AudioClip& clip, int frame_len_ms, int hop_ms,
                                              Window window) {
    check_sample_rate(clip.sample_rate);
    if (clip.samples.empty()) throw DataError("frame_signal: empty clip");
    if (frame_len_ms <= 0 || hop_ms <= 0) throw DataError("frame_signal: nonpositive framing");
    std::size_t frame_len =
        static_cast<std::size_t>(clip.sample_rate) * static_cast<std::size_t>(frame_len_ms) / 1000;
    std::size_t hop =
        static_cast<std::size_t>(clip.sample_rate) * static_cast<std::size_t>(hop_ms) / 1000;
    std::size_t n = clip.samples.size();
    if (n < frame_len)
        throw DataError("frame_signal: clip shorter than one frame (" + std::to_string(n) + " < " +
                        std::to_string(frame_len) + ")");

    std::size_t count = 1 + (n - frame_len) / hop;
    std::vector<double> win(frame_len, 1.0);
    if (window == Window::Hann && frame_len > 1) {
        for (std::size_t i = 0; i < frame_len; ++i)
            win[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                           static_cast<double>(frame_len - 1)));
    }
    std::vector<std::vector<double>> frames(count, std::vector<double>(frame_len));
    for (std::size_t f = 0; f < count; ++f) {
        std::size_t base = f * hop;
        for (std::size_t i = 0; i < frame_len; ++i) frames[f][i] = clip.samples[base + i] * win[i];
    }
    return frames;
}

Tensor stft_magnitude(const std::vector<std::vector<double>>& frames, std::size_t n_fft) {
    if (frames.empty()) throw DataError("stft_magnitude: no frames");
    std::size_t frame_len = frames[0].size();
    if (n_fft < frame_len) throw DataError("stft_magnitude: n_fft smaller than frame");
    std::size_t n_bins = n_fft / 2 + 1;
    Tensor out({frames.size(), n_bins});
    for (std::size_t f = 0; f < frames.size(); ++f) {
        const auto& x = frames[f];
        for (std::size_t k = 0; k < n_bins; ++k) {
            double re = 0.0, im = 0.0;
            double w = -2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(n_fft);
            for (std::size_t t = 0; t < frame_len; ++t) {
                double ang = w * static_cast<double>(t);
                re += x[t] * std::cos(ang);
                im += x[t] * std::sin(ang);
            }
            out.at(f, k) = std::sqrt(re * re + im * im);
        }
    }
    out.check_finite("stft_magnitude");
    return out;
}

std::vector<double> mel_center_frequencies(std::size_t n_mels, int sample_rate) {
    double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> centers(n_mels);
    // n_mels triangles need n_mels + 2 edge points across [0, Nyquist].
    for (std::size_t m = 0; m < n_mels; ++m)
        centers[m] = mel_to_hz(mel_max * static_cast<double>(m + 1) /
                               static_cast<double>(n_mels + 1));
    return centers;
}

Tensor mel_filterbank(std::size_t n_mels, std::size_t n_bins, std::size_t n_fft,
                      int sample_rate) {
    if (n_mels < 2) throw DataError("mel_filterbank: n_mels must be >= 2");
    double mel_max = hz_to_mel(sample_rate / 2.0);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t m = 0; m < n_mels + 2; ++m)
        edges[m] = mel_to_hz(mel_max * static_cast<double>(m) / static_cast<double>(n_mels + 1));
    Tensor fb({n_mels, n_bins});
    double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(n_fft);
    for (std::size_t m = 0; m < n_mels; ++m) {
        double lo = edges[m], mid = edges[m + 1], hi = edges[m + 2];
        for (std::size_t k = 0; k < n_bins; ++k) {
            double f = bin_hz * static_cast<double>(k);
            double w = 0.0;
            if (f > lo && f < mid)
                w = (f - lo) / (mid - lo);
            else if (f >= mid && f < hi)
                w = (hi - f) / (hi - mid);
            fb.at(m, k) = w;
        }
    }
    return fb;
}

FeatureSequence log_mel(const Tensor& stft, int sample_rate, std::size_t n_mels,
                        int frame_len_ms, int hop_ms) {
    if (n_mels < 2) throw DataError("log_mel: n_mels must be >= 2");
    std::size_t n_bins = stft.cols();
    std::size_t n_fft = (n_bins - 1) * 2;
    Tensor fb = mel_filterbank(n_mels, n_bins, n_fft, sample_rate);
    FeatureSequence out;
    out.frame_len_ms = frame_len_ms;
    out.hop_ms = hop_ms;
    out.frames = Tensor({stft.rows(), n_mels});
    for (std::size_t t = 0; t < stft.rows(); ++t) {
        for (std::size_t m = 0; m < n_mels; ++m) {
            double e = 0.0;
            for (std::size_t k = 0; k < n_bins; ++k) e += fb.at(m, k) * stft.at(t, k) * stft.at(t, k);
            out.frames.at(t, m) = std::log(std::max(e, kLogFloor));
        }
    }
    out.frames.check_finite("log_mel");
    return out;
}

FeatureSequence extract_features(const AudioClip& clip, int frame_len_ms, int hop_ms,
                                 std::size_t n_fft, std::size_t n_mels) {
    auto frames = frame_signal(clip, frame_len_ms, hop_ms);
    Tensor mag = stft_magnitude(frames, n_fft);
    return log_mel(mag, clip.sample_rate, n_mels, frame_len_ms, hop_ms);
}

namespace {

template <typename T>
T read_le(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

template <typename T>
void write_le(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open wav: " + path);
    char riff[4], wave[4];
    in.read(riff, 4);
    (void)read_le<std::uint32_t>(in);
    in.read(wave, 4);
    if (std::strncmp(riff, "RIFF", 4) != 0 || std::strncmp(wave, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path);

    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t sample_rate = 0;
    std::vector<std::int16_t> pcm;
    while (in.good()) {
        char id[4];
        in.read(id, 4);
        if (!in.good()) break;
        auto size = read_le<std::uint32_t>(in);
        if (std::strncmp(id, "fmt ", 4) == 0) {
            format = read_le<std::uint16_t>(in);
            channels = read_le<std::uint16_t>(in);
            sample_rate = read_le<std::uint32_t>(in);
            (void)read_le<std::uint32_t>(in);
            (void)read_le<std::uint16_t>(in);
            bits = read_le<std::uint16_t>(in);
            if (size > 16) in.seekg(size - 16, std::ios::cur);
        } else if (std::strncmp(id, "data", 4) == 0) {
            pcm.resize(size / 2);
            in.read(reinterpret_cast<char*>(pcm.data()), size);
            break;
        } else {
            in.seekg(size, std::ios::cur);
        }
    }
    if (format != 1 || channels != 1 || bits != 16)
        throw DataError("wav must be 16-bit PCM mono: " + path);
    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    check_sample_rate(clip.sample_rate);
    clip.samples.reserve(pcm.size());
    for (std::int16_t s : pcm) clip.samples.push_back(static_cast<double>(s) / 32768.0);
    if (clip.samples.empty()) throw DataError("wav has no samples: " + path);
    return clip;
}

void write_wav(const std::string& path, const AudioClip& clip) {
    check_sample_rate(clip.sample_rate);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write wav: " + path);
    auto n = static_cast<std::uint32_t>(clip.samples.size());
    std::uint32_t data_size = n * 2;
    out.write("RIFF", 4);
    write_le<std::uint32_t>(out, 36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_le<std::uint32_t>(out, 16);
    write_le<std::uint16_t>(out, 1);
    write_le<std::uint16_t>(out, 1);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
    write_le<std::uint16_t>(out, 2);
    write_le<std::uint16_t>(out, 16);
    out.write("data", 4);
    write_le<std::uint32_t>(out, data_size);
    for (double s : clip.samples) {
        double clamped = std::clamp(s, -1.0, 1.0);
        write_le<std::int16_t>(out, static_cast<std::int16_t>(std::lrint(clamped * 32767.0)));
    }
}

void write_features_csv(const std::string& path, const FeatureSequence& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out.precision(9);
    for (std::size_t t = 0; t < f.num_frames(); ++t) {
        for (std::size_t m = 0; m < f.num_mels(); ++m) {
            if (m) out << ",";
            out << f.frames.at(t, m);
        }
        out << "\n";
    }
}

void write_features_bin(const std::string& path, const FeatureSequence& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.num_frames()));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.num_mels()));
    for (double v : f.frames.data()) write_le<float>(out, static_cast<float>(v));
}

FeatureSequence read_features_bin(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path);
    auto t = read_le<std::uint32_t>(in);
    auto f = read_le<std::uint32_t>(in);
    FeatureSequence out;
    out.frames = Tensor({t, f}, Dtype::F32);
    for (std::size_t i = 0; i < out.frames.size(); ++i) {
        float v = read_le<float>(in);
        out.frames[i] = static_cast<double>(v);
    }
    if (!in) throw DataError("truncated feature file: " + path);
    return out;
}

}  // namespace csr

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "csr/tensor.hpp"

namespace csr {

struct AudioClip {
    std::vector<double> samples;  // in [-1, 1]
    int sample_rate = 16000;      // Hz, one of 8000/16000/32000
};

// T x F log-Mel frames plus the framing that produced them.
struct FeatureSequence {
    Tensor frames;  // (T, F)
    int frame_len_ms = 25;
    int hop_ms = 10;

    std::size_t num_frames() const { return frames.rows(); }
    std::size_t num_mels() const { return frames.cols(); }
};

enum class Window { Hann, Rect };

// Windowed frames, count = 1 + floor((N - L) / H). Throws when the clip is
// shorter than one frame. 25 ms at 16 kHz gives 400-sample frames.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip, int frame_len_ms,
                                              int hop_ms, Window window = Window::Hann);

// Per-frame DFT magnitudes, zero-padded to n_fft: (T, n_fft/2 + 1).
// Plain O(N^2) DFT; desk-scale inputs only.
Tensor stft_magnitude(const std::vector<std::vector<double>>& frames, std::size_t n_fft);

// Triangular Mel filterbank spanning 0..Nyquist, energy floored at 1e-10,
// natural log.
FeatureSequence log_mel(const Tensor& stft, int sample_rate, std::size_t n_mels,
                        int frame_len_ms = 25, int hop_ms = 10);

// Full chain with default windowing.
FeatureSequence extract_features(const AudioClip& clip, int frame_len_ms, int hop_ms,
                                 std::size_t n_fft, std::size_t n_mels);

// Mel filterbank rows (n_mels, n_bins); exposed for tests.
Tensor mel_filterbank(std::size_t n_mels, std::size_t n_bins, std::size_t n_fft,
                      int sample_rate);
std::vector<double> mel_center_frequencies(std::size_t n_mels, int sample_rate);

// 16-bit PCM mono WAV.
AudioClip read_wav(const std::string& path);
void write_wav(const std::string& path, const AudioClip& clip);

// FeatureSequence serialization: CSV (one frame per row) or little-endian
// f32 binary with an 8-byte header (T, F as u32 each).
void write_features_csv(const std::string& path, const FeatureSequence& f);
void write_features_bin(const std::string& path, const FeatureSequence& f);
FeatureSequence read_features_bin(const std::string& path);

}  // namespace csr

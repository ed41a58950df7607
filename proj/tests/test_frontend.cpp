#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numbers>

#include "csr/error.hpp"
#include "csr/frontend.hpp"
#include "csr/rng.hpp"

using namespace csr;

namespace {

AudioClip sine(double hz, double seconds, int sr, double amp = 0.5) {
    AudioClip c;
    c.sample_rate = sr;
    auto n = static_cast<std::size_t>(seconds * sr);
    for (std::size_t i = 0; i < n; ++i)
        c.samples.push_back(amp * std::sin(2.0 * std::numbers::pi * hz *
                                           static_cast<double>(i) / sr));
    return c;
}

}  // namespace

TEST_CASE("25 ms at 16 kHz is a 400-sample frame") {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(400, 0.1);
    auto frames = frame_signal(c, 25, 10);
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].size() == 400);
}

TEST_CASE("480 samples with 160 hop still one frame") {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(480, 0.0);
    CHECK(frame_signal(c, 25, 10).size() == 1);
}

TEST_CASE("4000 samples, L=400, H=160 gives 23 frames") {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(4000, 0.0);
    CHECK(frame_signal(c, 25, 10).size() == 23);
}

TEST_CASE("clip shorter than one frame errors") {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(399, 0.0);
    CHECK_THROWS_AS(frame_signal(c, 25, 10), DataError);
}

TEST_CASE("frame count formula over 1000 random (N, L, H)") {
    Rng rng(71);
    for (int trial = 0; trial < 1000; ++trial) {
        // frame_len/hop in ms on an 8 kHz clock so samples = ms * 8.
        int frame_ms = 1 + static_cast<int>(rng.next_below(50));
        int hop_ms = 1 + static_cast<int>(rng.next_below(30));
        std::size_t L = static_cast<std::size_t>(frame_ms) * 8;
        std::size_t n = L + rng.next_below(4000);
        AudioClip c;
        c.sample_rate = 8000;
        c.samples.assign(n, 0.0);
        std::size_t H = static_cast<std::size_t>(hop_ms) * 8;
        std::size_t want = 1 + (n - L) / H;
        CHECK(frame_signal(c, frame_ms, hop_ms).size() == want);
    }
}

TEST_CASE("zero signal gives all-zero magnitudes") {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(800, 0.0);
    Tensor mag = stft_magnitude(frame_signal(c, 25, 10), 512);
    for (double v : mag.data()) CHECK(v == 0.0);
}

TEST_CASE("DC signal with rectangular window concentrates in bin 0") {
    AudioClip c;
    c.sample_rate = 16000;
    c.samples.assign(400, 1.0);
    Tensor mag = stft_magnitude(frame_signal(c, 25, 10, Window::Rect), 512);
    REQUIRE(mag.rows() == 1);
    std::size_t best = 0;
    for (std::size_t k = 1; k < mag.cols(); ++k)
        if (mag.at(0, k) > mag.at(0, best)) best = k;
    CHECK(best == 0);
    CHECK(mag.at(0, 0) == doctest::Approx(400.0).epsilon(1e-9));
}

TEST_CASE("1 kHz sine at 16 kHz, Nfft 512 peaks at bin 32") {
    AudioClip c = sine(1000.0, 0.1, 16000);
    Tensor mag = stft_magnitude(frame_signal(c, 25, 10), 512);
    for (std::size_t t = 0; t < mag.rows(); ++t) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < mag.cols(); ++k)
            if (mag.at(t, k) > mag.at(t, best)) best = k;
        CHECK(best == 32);
    }
}

TEST_CASE("DFT magnitude matches the naive O(N^2) oracle") {
    Rng rng(73);
    std::vector<std::vector<double>> frames(2, std::vector<double>(64));
    for (auto& f : frames)
        for (double& v : f) v = rng.uniform(-1, 1);
    Tensor mag = stft_magnitude(frames, 64);
    for (std::size_t t = 0; t < 2; ++t) {
        for (std::size_t k = 0; k <= 32; ++k) {
            double re = 0, im = 0;
            for (std::size_t n = 0; n < 64; ++n) {
                double ang = -2.0 * std::numbers::pi * static_cast<double>(k * n) / 64.0;
                re += frames[t][n] * std::cos(ang);
                im += frames[t][n] * std::sin(ang);
            }
            CHECK(std::abs(mag.at(t, k) - std::hypot(re, im)) < 1e-8);
        }
    }
}

TEST_CASE("zero spectrum maps to the log floor") {
    Tensor zero_spec = Tensor::zeros({3, 257});
    FeatureSequence f = log_mel(zero_spec, 16000, 40);
    for (double v : f.frames.data()) CHECK(v == doctest::Approx(std::log(1e-10)).epsilon(1e-12));
}

TEST_CASE("mel filters overlap and have positive mass") {
    Tensor fb = mel_filterbank(40, 257, 512, 16000);
    for (std::size_t m = 0; m < 40; ++m) {
        double s = 0.0;
        for (std::size_t k = 0; k < 257; ++k) s += fb.at(m, k);
        CHECK(s > 0.0);
    }
    // Adjacent filters share support.
    for (std::size_t m = 0; m + 1 < 40; ++m) {
        bool overlap = false;
        for (std::size_t k = 0; k < 257; ++k)
            if (fb.at(m, k) > 0 && fb.at(m + 1, k) > 0) overlap = true;
        CHECK(overlap);
    }
}

TEST_CASE("mel center frequencies strictly increase") {
    auto centers = mel_center_frequencies(40, 16000);
    for (std::size_t m = 0; m + 1 < centers.size(); ++m) CHECK(centers[m] < centers[m + 1]);
}

TEST_CASE("white-noise features: averaging trials shrinks variance") {
    // Monte-Carlo sanity check: the variance of a 100-seed mean is far below
    // the variance across single trials.
    Rng seed_rng(79);
    auto feature_mean = [&](Rng& rng) {
        AudioClip c;
        c.sample_rate = 16000;
        for (int i = 0; i < 1600; ++i) c.samples.push_back(rng.uniform(-0.9, 0.9));
        FeatureSequence f = extract_features(c, 25, 10, 512, 20);
        double s = 0.0;
        for (double v : f.frames.data()) s += v;
        return s / static_cast<double>(f.frames.size());
    };
    std::vector<double> singles;
    double accum = 0.0;
    for (int t = 0; t < 100; ++t) {
        Rng r = seed_rng.split(static_cast<std::uint64_t>(t));
        double m = feature_mean(r);
        singles.push_back(m);
        accum += m;
    }
    double grand = accum / 100.0;
    double var_single = 0.0;
    for (double m : singles) var_single += (m - grand) * (m - grand);
    var_single /= 99.0;
    // Mean of 100 trials should estimate the grand mean ~10x tighter than a
    // single trial's std.
    double se_mean = std::sqrt(var_single / 100.0);
    CHECK(se_mean < std::sqrt(var_single));
    CHECK(var_single > 0.0);
}

TEST_CASE("wav round-trip") {
    AudioClip c = sine(440.0, 0.05, 16000);
    write_wav("test_roundtrip.wav", c);
    AudioClip r = read_wav("test_roundtrip.wav");
    REQUIRE(r.samples.size() == c.samples.size());
    CHECK(r.sample_rate == 16000);
    for (std::size_t i = 0; i < r.samples.size(); ++i)
        CHECK(std::abs(r.samples[i] - c.samples[i]) < 1e-4);
    std::remove("test_roundtrip.wav");
}

TEST_CASE("feature binary round-trip") {
    AudioClip c = sine(250.0, 0.05, 16000);
    FeatureSequence f = extract_features(c, 25, 10, 512, 12);
    write_features_bin("test_feat.bin", f);
    FeatureSequence r = read_features_bin("test_feat.bin");
    REQUIRE(r.num_frames() == f.num_frames());
    REQUIRE(r.num_mels() == f.num_mels());
    for (std::size_t i = 0; i < f.frames.size(); ++i)
        CHECK(std::abs(r.frames[i] - f.frames[i]) < 1e-5);
    std::remove("test_feat.bin");
    write_features_csv("test_feat.csv", f);
    std::remove("test_feat.csv");
}

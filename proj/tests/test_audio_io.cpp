#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cnmf/audio_io.hpp"

namespace {

using namespace cnmf;
namespace fs = std::filesystem;

fs::path temp_path(const std::string& name) {
    return fs::temp_directory_path() / ("cnmf_audio_" + name);
}

AudioSignal sine(double freq, double seconds, int fs, double amp = 0.5) {
    AudioSignal s;
    s.sample_rate = fs;
    s.samples.resize(static_cast<std::size_t>(seconds * fs));
    for (std::size_t n = 0; n < s.size(); ++n) {
        s.samples[n] = amp * std::sin(2.0 * std::numbers::pi * freq * n / fs);
    }
    return s;
}

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(rng);
    return v;
}

// Minimal WAV writer used to produce files the library would not write.
std::string wav_header(std::uint16_t tag, std::uint16_t channels, std::uint32_t rate,
                       std::uint16_t bits, std::uint32_t data_bytes) {
    std::string out;
    auto u16 = [&](std::uint16_t v) { out.push_back(char(v & 0xff)); out.push_back(char(v >> 8)); };
    auto u32 = [&](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(char((v >> (8 * i)) & 0xff));
    };
    out += "RIFF";
    u32(36 + data_bytes);
    out += "WAVEfmt ";
    u32(16);
    u16(tag);
    u16(channels);
    u32(rate);
    u32(rate * channels * bits / 8);
    u16(static_cast<std::uint16_t>(channels * bits / 8));
    u16(bits);
    out += "data";
    u32(data_bytes);
    return out;
}

std::span<const unsigned char> as_bytes(const std::string& s) {
    return {reinterpret_cast<const unsigned char*>(s.data()), s.size()};
}

TEST(Wav, Pcm16RoundTripWithinQuantization) {
    const AudioSignal x = sine(1000.0, 0.25, 16000);
    const auto path = temp_path("sine16.wav");
    EXPECT_EQ(write_wav(x, path.string(), SampleFormat::pcm16), 0u);
    const AudioSignal y = read_wav(path.string());
    ASSERT_EQ(y.size(), x.size());
    EXPECT_EQ(y.sample_rate, 16000);
    for (std::size_t n = 0; n < x.size(); ++n) {
        EXPECT_LE(std::abs(y.samples[n] - x.samples[n]), 1.0 / 32768.0);
    }
    fs::remove(path);
}

TEST(Wav, Float32RoundTripIsBitExact) {
    AudioSignal x;
    for (double v : random_vector(4000, 3)) x.samples.push_back(static_cast<float>(v));
    const auto path = temp_path("noise32.wav");
    write_wav(x, path.string(), SampleFormat::float32);
    const AudioSignal y = read_wav(path.string());
    ASSERT_EQ(y.size(), x.size());
    EXPECT_EQ(y.samples, x.samples);
    fs::remove(path);
}

TEST(Wav, ZeroSignal) {
    AudioSignal x;
    x.samples.assign(16000, 0.0);
    const auto path = temp_path("zeros.wav");
    write_wav(x, path.string());
    const AudioSignal y = read_wav(path.string());
    ASSERT_EQ(y.size(), 16000u);
    for (double v : y.samples) EXPECT_EQ(v, 0.0);
    fs::remove(path);
}

TEST(Wav, Pcm16ClipsAndCounts) {
    AudioSignal x;
    x.samples = {2.0, -3.0, 0.5};
    const EncodedWav enc = encode_wav(x, SampleFormat::pcm16);
    EXPECT_EQ(enc.clipped, 2u);
    const AudioSignal y = decode_wav(as_bytes(enc.bytes));
    EXPECT_NEAR(y.samples[0], 1.0, 1.0 / 32768.0);
    EXPECT_EQ(y.samples[1], -1.0);
    EXPECT_NEAR(y.samples[2], 0.5, 1.0 / 32768.0);
}

TEST(Wav, StereoIsUnsupported) {
    std::string file = wav_header(1, 2, 16000, 16, 8);
    file.append(8, '\0');
    EXPECT_THROW(decode_wav(as_bytes(file)), UnsupportedFormat);
}

TEST(Wav, EightBitIsUnsupported) {
    std::string file = wav_header(1, 1, 16000, 8, 4);
    file.append(4, '\0');
    EXPECT_THROW(decode_wav(as_bytes(file)), UnsupportedFormat);
}

TEST(Wav, MalformedHeaders) {
    EXPECT_THROW(decode_wav(as_bytes(std::string("RIFX"))), MalformedFile);
    std::string no_data = wav_header(1, 1, 16000, 16, 0).substr(0, 36);
    EXPECT_THROW(decode_wav(as_bytes(no_data)), MalformedFile);
    std::string bad_magic = wav_header(1, 1, 16000, 16, 0);
    bad_magic[8] = 'X';
    EXPECT_THROW(decode_wav(as_bytes(bad_magic)), MalformedFile);
}

TEST(Wav, MissingFileIsIoError) {
    EXPECT_THROW(read_wav("/nonexistent/dir/file.wav"), IoError);
}

TEST(Wav, UnwritablePathIsIoError) {
    AudioSignal x;
    x.samples = {0.0};
    EXPECT_THROW(write_wav(x, "/nonexistent/dir/out.wav"), IoError);
}

TEST(Wav, SignalInvariants) {
    AudioSignal bad;
    bad.samples = {0.0, std::nan("")};
    EXPECT_THROW(bad.validate(), InvalidArgument);
    AudioSignal rate;
    rate.sample_rate = 0;
    EXPECT_THROW(rate.validate(), InvalidArgument);
}

TEST(Convolution, UnitImpulseIsIdentity) {
    AudioSignal dry{random_vector(300, 1), 16000};
    AudioSignal rir{{1.0, 0.0, 0.0}, 16000};
    const AudioSignal out = apply_rir(dry, rir);
    ASSERT_EQ(out.size(), dry.size() + 2);
    for (std::size_t n = 0; n < dry.size(); ++n) EXPECT_EQ(out.samples[n], dry.samples[n]);
    EXPECT_EQ(out.samples[300], 0.0);
    EXPECT_EQ(out.samples[301], 0.0);
}

TEST(Convolution, HandExample) {
    AudioSignal dry{{1.0, 0.0, 0.0}, 16000};
    AudioSignal rir{{1.0, 0.5}, 16000};
    EXPECT_EQ(apply_rir(dry, rir).samples, (std::vector<double>{1.0, 0.5, 0.0, 0.0}));
}

TEST(Convolution, ZeroInput) {
    AudioSignal dry{std::vector<double>(500, 0.0), 16000};
    AudioSignal rir{random_vector(200, 2), 16000};
    for (double v : apply_rir(dry, rir).samples) EXPECT_EQ(v, 0.0);
}

TEST(Convolution, RateMismatch) {
    AudioSignal a{{1.0}, 16000};
    AudioSignal b{{1.0}, 8000};
    EXPECT_THROW(apply_rir(a, b), SampleRateMismatch);
}

double rel_err(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num / den);
}

std::vector<double> direct(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

TEST(Convolution, FftPathMatchesDirectSum) {
    const auto a = random_vector(3001, 5);
    const auto b = random_vector(700, 6);
    EXPECT_LE(rel_err(convolve(a, b), direct(a, b)), 1e-9);
}

TEST(Convolution, Linearity) {
    const auto x = random_vector(2000, 7);
    const auto y = random_vector(2000, 8);
    const auto h = random_vector(900, 9);
    const double a = 0.7, b = -1.3;
    std::vector<double> mix(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) mix[i] = a * x[i] + b * y[i];
    const auto lhs = convolve(mix, h);
    const auto cx = convolve(x, h);
    const auto cy = convolve(y, h);
    std::vector<double> rhs(lhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * cx[i] + b * cy[i];
    EXPECT_LE(rel_err(lhs, rhs), 1e-9);
}

TEST(Convolution, Commutative) {
    const auto x = random_vector(1500, 10);
    const auto h = random_vector(400, 11);
    EXPECT_LE(rel_err(convolve(x, h), convolve(h, x)), 1e-12);
}

TEST(Normalize, PeakAndZero) {
    AudioSignal x{{0.1, -0.4, 0.2}, 16000};
    const AudioSignal y = peak_normalize(x, 0.9);
    EXPECT_DOUBLE_EQ(y.samples[1], -0.9);
    AudioSignal z{{0.0, 0.0}, 16000};
    EXPECT_EQ(peak_normalize(z, 0.9).samples, z.samples);
}

}  // namespace

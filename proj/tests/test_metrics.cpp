#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cnmf/metrics.hpp"
#include "cnmf/rir.hpp"
#include "support/speech_like.hpp"

namespace {

using namespace cnmf;

AudioSignal with_noise(const AudioSignal& x, double snr_db, std::uint64_t seed) {
    double power = 0.0;
    for (double v : x.samples) power += v * v;
    power /= static_cast<double>(x.size());
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, sigma);
    AudioSignal y = x;
    for (double& v : y.samples) v += g(rng);
    return y;
}

AudioSignal scaled(AudioSignal x, double gain) {
    for (double& v : x.samples) v *= gain;
    return x;
}

AudioSignal reverberant(const AudioSignal& dry, double t60) {
    RoomSpec room;
    room.t60 = t60;
    AudioSignal wet = apply_rir(dry, image_method_rir(room, static_cast<std::size_t>(1.2 * t60 * 16000)));
    wet.samples.resize(dry.size());
    return peak_normalize(wet, 0.7);
}

class Metrics : public ::testing::Test {
protected:
    static void SetUpTestSuite() { clean_ = new AudioSignal(fixtures::speech_like(1, 2.0)); }
    static void TearDownTestSuite() { delete clean_; }
    static const AudioSignal& clean() { return *clean_; }

private:
    static inline AudioSignal* clean_ = nullptr;
};

TEST_F(Metrics, IdenticalSignals) {
    const MetricsReport r = evaluate(clean(), clean());
    EXPECT_DOUBLE_EQ(r.fwssnr_db, 35.0);
    EXPECT_EQ(r.cepstral_distance, 0.0);
    EXPECT_GT(r.frames_used, 50u);
}

TEST_F(Metrics, NoiseAtZeroDb) {
    const double v = fwssnr(clean(), with_noise(clean(), 0.0, 5));
    EXPECT_GE(v, -10.0);
    EXPECT_LE(v, 10.0);
}

TEST_F(Metrics, ReverberationLowersScores) {
    const AudioSignal wet = reverberant(clean(), 0.45);
    const MetricsReport r = evaluate(clean(), wet);
    EXPECT_LT(r.fwssnr_db, 35.0);
    EXPECT_GT(r.cepstral_distance, 0.0);
}

TEST_F(Metrics, RangesAreClipped) {
    for (double snr : {-20.0, 0.0, 20.0}) {
        const MetricsReport r = evaluate(clean(), with_noise(clean(), snr, 6));
        EXPECT_GE(r.fwssnr_db, -10.0);
        EXPECT_LE(r.fwssnr_db, 35.0);
        EXPECT_GE(r.cepstral_distance, 0.0);
        EXPECT_LE(r.cepstral_distance, 10.0);
    }
}

TEST_F(Metrics, CommonGainInvariance) {
    const AudioSignal test = with_noise(clean(), 5.0, 7);
    const MetricsReport a = evaluate(clean(), test);
    const MetricsReport b = evaluate(scaled(clean(), 3.7), scaled(test, 3.7));
    EXPECT_NEAR(a.fwssnr_db, b.fwssnr_db, 1e-6);
    EXPECT_NEAR(a.cepstral_distance, b.cepstral_distance, 1e-9);
}

TEST_F(Metrics, CepstralDistanceIsSymmetric) {
    const AudioSignal test = reverberant(clean(), 0.6);
    EXPECT_NEAR(cepstral_distance(clean(), test), cepstral_distance(test, clean()), 1e-12);
}

TEST_F(Metrics, CepstralDistanceIgnoresGainOfTest) {
    EXPECT_NEAR(cepstral_distance(clean(), scaled(clean(), 0.25)), 0.0, 1e-9);
}

TEST_F(Metrics, TestIsPaddedOrTruncated) {
    AudioSignal longer = clean();
    longer.samples.resize(clean().size() + 1000, 0.0);
    EXPECT_DOUBLE_EQ(fwssnr(clean(), longer), 35.0);
    AudioSignal shorter = clean();
    shorter.samples.resize(clean().size() - 800);
    EXPECT_LT(fwssnr(clean(), shorter), 35.0);
}

TEST(MetricsErrors, RateMismatch) {
    AudioSignal a{std::vector<double>(4000, 0.1), 16000};
    AudioSignal b{std::vector<double>(4000, 0.1), 8000};
    EXPECT_THROW(fwssnr(a, b), SampleRateMismatch);
    EXPECT_THROW(cepstral_distance(a, b), SampleRateMismatch);
}

TEST(MetricsErrors, TooShort) {
    AudioSignal a{std::vector<double>(600, 0.1), 16000};  // two frames
    EXPECT_THROW(fwssnr(a, a), SignalTooShort);
    EXPECT_THROW(cepstral_distance(a, a), SignalTooShort);
}

TEST(Lpc, RecoversAutoregressiveCoefficients) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> x(20000, 0.0);
    for (std::size_t n = 2; n < x.size(); ++n) x[n] = 1.3 * x[n - 1] - 0.6 * x[n - 2] + g(rng);
    const auto r = metrics::lpc(x);
    ASSERT_TRUE(r.ok);
    EXPECT_NEAR(r.predictor[1], 1.3, 0.03);
    EXPECT_NEAR(r.predictor[2], -0.6, 0.03);
    for (int k = 3; k <= metrics::kLpcOrder; ++k) EXPECT_NEAR(r.predictor[k], 0.0, 0.03);
}

TEST(Lpc, SilentFrameFails) {
    EXPECT_FALSE(metrics::lpc(std::vector<double>(400, 0.0)).ok);
}

TEST(Lpc, CepstrumOfSinglePole) {
    // 1 / (1 - a z^-1) has cepstrum c_n = a^n / n.
    std::array<double, metrics::kLpcOrder + 1> a{};
    a[1] = 0.5;
    const auto c = metrics::lpc_cepstrum(a);
    for (int n = 1; n <= metrics::kLpcOrder; ++n) EXPECT_NEAR(c[n], std::pow(0.5, n) / n, 1e-15);
}

TEST(Bands, TwentyFiveBandsInRange) {
    const auto filters = metrics::critical_band_filters(16000, 1024);
    ASSERT_EQ(filters.size(), 25u);
    double prev_centre = 0.0;
    for (const auto& f : filters) {
        std::size_t arg = 0;
        for (std::size_t b = 0; b < f.size(); ++b) if (f[b] > f[arg]) arg = b;
        const double centre = arg * 16000.0 / 1024.0;
        EXPECT_GE(centre, 70.0);
        EXPECT_LE(centre, 8000.0);
        EXPECT_GE(centre, prev_centre);
        prev_centre = centre;
    }
    EXPECT_NEAR(metrics::bark_to_hz(metrics::hz_to_bark(1234.0)), 1234.0, 1e-9);
}

TEST(Report, TextAndCsv) {
    const MetricsReport r{12.5, 3.25, 97};
    std::ostringstream text, csv;
    write_report(text, r);
    EXPECT_EQ(text.str(), "fwssnr_db=12.5\ncepstral_distance=3.25\nframes_used=97\n");
    write_report_csv_header(csv);
    write_report_csv_row(csv, "a.wav", r);
    EXPECT_EQ(csv.str(), "file,fwssnr_db,cepstral_distance,frames_used\na.wav,12.5,3.25,97\n");
}

}  // namespace

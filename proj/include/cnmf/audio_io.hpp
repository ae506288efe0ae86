// Mono audio container, RIFF/WAVE reading and writing, and time-domain
// convolution with a room impulse response.

#ifndef CNMF_AUDIO_IO_HPP
#define CNMF_AUDIO_IO_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "cnmf/error.hpp"

namespace cnmf {

struct AudioSignal {
    std::vector<double> samples;
    int sample_rate = 16000;

    std::size_t size() const noexcept { return samples.size(); }
    double duration() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }

    /// Throws InvalidArgument if the rate is not positive or a sample is not finite.
    void validate() const {
        if (sample_rate <= 0) {
            throw InvalidArgument("sample rate must be positive");
        }
        for (double v : samples) {
            if (!std::isfinite(v)) {
                throw InvalidArgument("audio signal contains non-finite samples");
            }
        }
    }
};

enum class SampleFormat { pcm16, float32 };

namespace detail {

static_assert(std::endian::native == std::endian::little,
              "WAV codec assumes a little-endian host");

inline std::uint16_t read_u16(const unsigned char* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline std::uint32_t read_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

}  // namespace detail

/// Decode a mono RIFF/WAVE buffer (PCM-16 or IEEE float-32).
inline AudioSignal decode_wav(std::span<const unsigned char> bytes) {
    using namespace detail;
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw MalformedFile("not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::span<const unsigned char> data;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* chunk = bytes.data() + pos;
        const std::uint32_t chunk_size = read_u32(chunk + 4);
        const std::size_t body = pos + 8;
        if (chunk_size > bytes.size() - body) {
            throw MalformedFile("chunk extends past end of file");
        }
        if (std::memcmp(chunk, "fmt ", 4) == 0) {
            if (chunk_size < 16) {
                throw MalformedFile("fmt chunk too short");
            }
            const unsigned char* f = bytes.data() + body;
            format = read_u16(f);
            channels = read_u16(f + 2);
            rate = read_u32(f + 4);
            bits = read_u16(f + 14);
            if (format == kFormatExtensible) {
                if (chunk_size < 40) {
                    throw MalformedFile("extensible fmt chunk too short");
                }
                format = read_u16(f + 24);  // first two bytes of the subformat GUID
            }
            have_fmt = true;
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            data = bytes.subspan(body, chunk_size);
            have_data = true;
        }
        pos = body + chunk_size + (chunk_size & 1u);
    }

    if (!have_fmt || !have_data) {
        throw MalformedFile("missing fmt or data chunk");
    }
    if (channels != 1) {
        throw UnsupportedFormat("only mono WAV is supported (got " + std::to_string(channels) +
                                " channels)");
    }
    if (rate == 0) {
        throw MalformedFile("zero sample rate");
    }

    AudioSignal out;
    out.sample_rate = static_cast<int>(rate);
    if (format == kFormatPcm && bits == 16) {
        const std::size_t n = data.size() / 2;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto v = static_cast<std::int16_t>(read_u16(data.data() + 2 * i));
            out.samples[i] = v / 32768.0;
        }
    } else if (format == kFormatFloat && bits == 32) {
        const std::size_t n = data.size() / 4;
        out.samples.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const float v = std::bit_cast<float>(read_u32(data.data() + 4 * i));
            if (!std::isfinite(v)) {
                throw MalformedFile("non-finite float sample");
            }
            out.samples[i] = v;
        }
    } else {
        throw UnsupportedFormat("unsupported WAV encoding (format " + std::to_string(format) +
                                ", " + std::to_string(bits) + " bits)");
    }
    return out;
}

inline AudioSignal read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open '" + path + "'");
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_wav(bytes);
}

struct EncodedWav {
    std::string bytes;
    std::size_t clipped = 0;  // samples outside [-1, 1] clipped by pcm16
};

inline EncodedWav encode_wav(const AudioSignal& signal, SampleFormat format) {
    using namespace detail;
    signal.validate();

    const std::uint16_t bits = format == SampleFormat::pcm16 ? 16 : 32;
    const std::uint32_t bytes_per_sample = bits / 8;
    const auto data_size = static_cast<std::uint32_t>(signal.size() * bytes_per_sample);

    EncodedWav out;
    std::string& b = out.bytes;
    b.reserve(44 + data_size);
    b += "RIFF";
    put_u32(b, 36 + data_size);
    b += "WAVEfmt ";
    put_u32(b, 16);
    put_u16(b, format == SampleFormat::pcm16 ? kFormatPcm : kFormatFloat);
    put_u16(b, 1);
    put_u32(b, static_cast<std::uint32_t>(signal.sample_rate));
    put_u32(b, static_cast<std::uint32_t>(signal.sample_rate) * bytes_per_sample);
    put_u16(b, static_cast<std::uint16_t>(bytes_per_sample));
    put_u16(b, bits);
    b += "data";
    put_u32(b, data_size);

    for (double v : signal.samples) {
        if (format == SampleFormat::pcm16) {
            if (v > 1.0 || v < -1.0) {
                ++out.clipped;
                v = std::clamp(v, -1.0, 1.0);
            }
            const double q = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
            put_u16(b, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
        } else {
            put_u32(b, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        }
    }
    return out;
}

/// Writes `signal` to `path`; returns the number of samples clipped (pcm16 only).
inline std::size_t write_wav(const AudioSignal& signal, const std::string& path,
                             SampleFormat format = SampleFormat::pcm16) {
    const EncodedWav enc = encode_wav(signal, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot open '" + path + "' for writing");
    }
    out.write(enc.bytes.data(), static_cast<std::streamsize>(enc.bytes.size()));
    if (!out) {
        throw IoError("write to '" + path + "' failed");
    }
    return enc.clipped;
}

/// Full linear convolution of two real sequences.
inline std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    const std::size_t out_len = a.size() + b.size() - 1;
    std::vector<double> out(out_len, 0.0);

    if (std::min(a.size(), b.size()) <= 64) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == 0.0) continue;
            for (std::size_t j = 0; j < b.size(); ++j) {
                out[i + j] += a[i] * b[j];
            }
        }
        return out;
    }

    std::size_t n = 1;
    while (n < out_len) n <<= 1;
    std::vector<double> pa(n, 0.0), pb(n, 0.0);
    std::copy(a.begin(), a.end(), pa.begin());
    std::copy(b.begin(), b.end(), pb.begin());

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> fa, fb;
    fft.fwd(fa, pa);
    fft.fwd(fb, pb);
    for (std::size_t i = 0; i < fa.size(); ++i) {
        fa[i] *= fb[i];
    }
    std::vector<double> full;
    fft.inv(full, fa);
    std::copy_n(full.begin(), out_len, out.begin());
    return out;
}

/// Reverberate `dry` with `rir`; output length is len(dry) + len(rir) - 1.
inline AudioSignal apply_rir(const AudioSignal& dry, const AudioSignal& rir) {
    if (dry.sample_rate != rir.sample_rate) {
        throw SampleRateMismatch("dry signal at " + std::to_string(dry.sample_rate) +
                                 " Hz, RIR at " + std::to_string(rir.sample_rate) + " Hz");
    }
    return AudioSignal{convolve(dry.samples, rir.samples), dry.sample_rate};
}

/// Scale so that the largest absolute sample equals `peak` (no-op on silence).
inline AudioSignal peak_normalize(AudioSignal signal, double peak) {
    double m = 0.0;
    for (double v : signal.samples) m = std::max(m, std::abs(v));
    if (m > 0.0) {
        for (double& v : signal.samples) v *= peak / m;
    }
    return signal;
}

}  // namespace cnmf

#endif  // CNMF_AUDIO_IO_HPP

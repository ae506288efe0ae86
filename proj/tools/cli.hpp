// Command-line front end: dereverb, simulate, evaluate, benchmark.
//
// Exit codes: 0 success, 1 invalid arguments or geometry, 2 I/O failure,
// 3 numerical failure.

#ifndef CNMF_TOOLS_CLI_HPP
#define CNMF_TOOLS_CLI_HPP

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "cnmf/cnmf.hpp"

namespace cnmf::cli {

namespace fs = std::filesystem;

enum ExitCode : int { kOk = 0, kInvalidArgs = 1, kIoFailure = 2, kNumericalFailure = 3 };

// ---------------------------------------------------------------------------
// Options

struct SolverOptions {
    SolverConfig solver;
    StftConfig stft;
    std::string method = "magnitude_replace";
    std::uint64_t seed = 0;
};

inline void add_solver_flags(CLI::App& app, SolverOptions& o) {
    app.add_option("--lambda-h", o.solver.lambda_h, "H smoothness weight")->capture_default_str();
    app.add_option("--lambda-s", o.solver.lambda_s, "S sparsity weight")->capture_default_str();
    app.add_option("--p", o.solver.p, "sparsity exponent in (0, 2)")->capture_default_str();
    app.add_option("--nh", o.solver.n_h, "kernel length in frames")->capture_default_str();
    app.add_option("--win", o.stft.window_len, "STFT window length")->capture_default_str();
    app.add_option("--hop", o.stft.hop, "STFT hop")->capture_default_str();
    app.add_option("--max-iter", o.solver.max_iter, "iteration cap")->capture_default_str();
    app.add_option("--delta-factor", o.solver.delta_factor, "stopping threshold relative to ||Y||_F")
        ->capture_default_str();
    app.add_option("--eps-floor", o.solver.eps_floor, "numerical floor relative to max(Y)")
        ->capture_default_str();
    app.add_flag("--no-rescale{false},--rescale{true}", o.solver.rescale,
                 "per-band l_inf rescaling of S");
    app.add_option("--method", o.method, "magnitude_replace | gain_mask")
        ->check(CLI::IsMember({"magnitude_replace", "gain_mask"}))
        ->capture_default_str();
    app.add_option("--seed", o.seed, "seed recorded in the manifest and used by benchmark")
        ->capture_default_str();
}

/// key=value lines describing every setting that affects the numbers.
inline void write_solver_manifest(std::ostream& os, const SolverOptions& o) {
    os << std::setprecision(17);
    os << "window=hann\n"
       << "window_len=" << o.stft.window_len << '\n'
       << "hop=" << o.stft.hop << '\n'
       << "lambda_h=" << o.solver.lambda_h << '\n'
       << "lambda_s=" << o.solver.lambda_s << '\n'
       << "p=" << o.solver.p << '\n'
       << "n_h=" << o.solver.n_h << '\n'
       << "max_iter=" << o.solver.max_iter << '\n'
       << "delta_factor=" << o.solver.delta_factor << '\n'
       << "rescale=" << (o.solver.rescale ? "true" : "false") << '\n'
       << "eps_floor=" << o.solver.eps_floor << '\n'
       << "method=" << o.method << '\n'
       << "solver_power_scale=" << solver_power_scale(o.stft) << '\n'
       << "seed=" << o.seed << '\n';
}

/// Parses "6x4x3" or "1,1,1.5" into three numbers.
inline std::optional<Point3> parse_point(std::string text) {
    std::replace(text.begin(), text.end(), 'x', ' ');
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream is(text);
    Point3 p{};
    if (!(is >> p[0] >> p[1] >> p[2])) return std::nullopt;
    std::string rest;
    if (is >> rest) return std::nullopt;
    return p;
}

inline std::vector<double> parse_list(std::string text) {
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream is(text);
    std::vector<double> out;
    double v;
    while (is >> v) out.push_back(v);
    return out;
}

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Maps library exceptions to exit codes and prints the message.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const NumericalFailure& e) {
        err << "error: numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const SampleRateMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidArgs;
    }
}

// ---------------------------------------------------------------------------
// dereverb

struct DereverbArgs {
    std::string input;
    std::string output;
    SolverOptions opts;
    std::string format = "pcm16";
    std::string dump_cost;
    std::string dump_spec;
};

inline int cmd_dereverb(const DereverbArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        a.opts.solver.validate();
        a.opts.stft.validate();
        const ReconstructMethod method = *parse_reconstruct_method(a.opts.method);
        const SampleFormat format = a.format == "float32" ? SampleFormat::float32 : SampleFormat::pcm16;

        auto t0 = Clock::now();
        const AudioSignal input = read_wav(a.input);
        const double t_read = seconds_since(t0);
        if (input.sample_rate != 16000) {
            err << "warning: input is " << input.sample_rate
                << " Hz; the defaults are tuned for 16000 Hz\n";
        }

        t0 = Clock::now();
        const DereverbResult r = dereverberate(input, a.opts.stft, a.opts.solver, method);
        const double t_process = seconds_since(t0);

        t0 = Clock::now();
        const std::size_t clipped = write_wav(r.output, a.output, format);
        if (clipped > 0) {
            err << "warning: " << clipped << " samples clipped to [-1, 1]\n";
        }
        if (!a.dump_cost.empty()) {
            std::ofstream f(a.dump_cost);
            if (!f) throw IoError("cannot write '" + a.dump_cost + "'");
            write_cost_csv(f, r.state.cost_history);
        }
        if (!a.dump_spec.empty()) {
            std::ofstream f(a.dump_spec);
            if (!f) throw IoError("cannot write '" + a.dump_spec + "'");
            write_spectrogram_text(f, r.clean_power);
        }
        const double t_write = seconds_since(t0);

        const std::string manifest_path = a.output + ".manifest";
        std::ofstream m(manifest_path);
        if (!m) throw IoError("cannot write '" + manifest_path + "'");
        m << "command=dereverb\n"
          << "input=" << a.input << '\n'
          << "output=" << a.output << '\n'
          << "format=" << a.format << '\n'
          << "sample_rate=" << input.sample_rate << '\n';
        write_solver_manifest(m, a.opts);
        m << "dump_cost=" << a.dump_cost << '\n'
          << "dump_spec=" << a.dump_spec << '\n'
          << "iterations=" << r.state.iteration << '\n'
          << "converged=" << (r.state.converged ? "true" : "false") << '\n'
          << "final_cost=" << r.state.cost_history.back().total() << '\n'
          << "time_read_s=" << t_read << '\n'
          << "time_process_s=" << t_process << '\n'
          << "time_write_s=" << t_write << '\n';

        out << "wrote " << a.output << " (" << r.state.iteration << " iterations"
            << (r.state.converged ? ", converged" : "") << ")\n";
        return kOk;
    });
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
    std::string room = "6x4x3";
    std::string source = "1,1,1.5";
    std::string mic = "4,2,1.5";
    std::optional<double> t60;
    std::optional<double> reflection;
    int order = -1;
    double length_s = 0.0;  // 0 = 1.2 * t60, or 0.5 s for a given coefficient
    int sample_rate = 16000;
    double speed_of_sound = 343.0;
    std::string conversion = "sabine";
    bool no_high_pass = false;
    std::string rir_out;
    std::string dry;
    std::string reverb_out;
    std::string format = "float32";
};

inline int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        if (a.rir_out.empty() && a.reverb_out.empty()) {
            throw InvalidArgument("nothing to write: give --out and/or --dry with --reverb-out");
        }
        if (!a.reverb_out.empty() && a.dry.empty()) {
            throw InvalidArgument("--reverb-out needs --dry");
        }
        RoomSpec room;
        const auto dims = parse_point(a.room);
        const auto src = parse_point(a.source);
        const auto mic = parse_point(a.mic);
        if (!dims || !src || !mic) {
            throw InvalidGeometry("could not parse room, source or microphone coordinates");
        }
        room.dimensions = *dims;
        room.source = *src;
        room.mic = *mic;
        room.t60 = a.t60;
        room.reflection_coeff = a.reflection;
        room.max_order = a.order;
        room.sample_rate = a.sample_rate;
        room.speed_of_sound = a.speed_of_sound;
        room.conversion = a.conversion == "sabine" ? T60Conversion::sabine : T60Conversion::image_decay;
        room.high_pass = !a.no_high_pass;
        room.validate();

        double length_s = a.length_s;
        if (length_s <= 0.0) length_s = a.t60 ? 1.2 * *a.t60 : 0.5;
        const auto length = static_cast<std::size_t>(std::ceil(length_s * a.sample_rate));
        const AudioSignal rir = image_method_rir(room, length);
        const SampleFormat format = a.format == "pcm16" ? SampleFormat::pcm16 : SampleFormat::float32;

        if (!a.rir_out.empty()) {
            write_wav(rir, a.rir_out, format);
            out << "wrote " << a.rir_out << " (" << length << " samples, reflection "
                << room.wall_reflection() << ")\n";
        }
        if (!a.reverb_out.empty()) {
            const AudioSignal dry = read_wav(a.dry);
            const AudioSignal wet = peak_normalize(apply_rir(dry, rir), 0.9);
            write_wav(wet, a.reverb_out, format);
            out << "wrote " << a.reverb_out << '\n';
        }
        return kOk;
    });
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateArgs {
    std::string clean;
    std::string test;
    std::string csv;
};

inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        const AudioSignal clean = read_wav(a.clean);
        const AudioSignal test = read_wav(a.test);
        const MetricsReport r = evaluate(clean, test);
        write_report(out, r);
        if (!a.csv.empty()) {
            const bool fresh = !fs::exists(a.csv) || fs::file_size(a.csv) == 0;
            std::ofstream f(a.csv, std::ios::app);
            if (!f) throw IoError("cannot append to '" + a.csv + "'");
            if (fresh) write_report_csv_header(f);
            write_report_csv_row(f, a.test, r);
        }
        return kOk;
    });
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkArgs {
    std::string corpus;
    std::string output;
    std::string t60s = "0.3,0.45,0.6,0.75";
    std::string room = "6x4x3";
    int jobs = 1;
    SolverOptions opts;
};

struct TrialResult {
    bool ok = false;
    std::string error;
    MetricsReport reverberant;
    MetricsReport processed;
};

/// Source and microphone drawn from the seed for one (file, condition).
inline RoomSpec benchmark_room(const Point3& dims, double t60, std::uint64_t seed,
                               std::size_t file_index, std::size_t condition_index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(file_index),
                      static_cast<std::uint32_t>(condition_index)};
    std::mt19937_64 rng(seq);
    auto draw = [&](double lo, double hi) {
        return lo + (hi - lo) * std::generate_canonical<double, 53>(rng);
    };
    RoomSpec room;
    room.dimensions = dims;
    room.t60 = t60;
    room.source = {draw(0.2, 0.4) * dims[0], draw(0.2, 0.8) * dims[1], draw(0.4, 0.6) * dims[2]};
    room.mic = {draw(0.6, 0.8) * dims[0], draw(0.2, 0.8) * dims[1], draw(0.4, 0.6) * dims[2]};
    return room;
}

/// Reverberates `dry` with an RIR whose direct path is advanced to sample 0
/// and scaled to unit gain, so the reference keeps the level and timing the
/// intrusive metrics need.
inline AudioSignal reverberate_for_benchmark(const AudioSignal& dry, const RoomSpec& room) {
    const auto length = static_cast<std::size_t>(std::ceil(1.2 * *room.t60 * room.sample_rate));
    AudioSignal rir = image_method_rir(room, length);
    double dist = 0.0;
    for (int a = 0; a < 3; ++a) dist += (room.source[a] - room.mic[a]) * (room.source[a] - room.mic[a]);
    dist = std::sqrt(dist);
    const auto delay = static_cast<long>(std::lround(dist * room.sample_rate / room.speed_of_sound));
    rir.samples.erase(rir.samples.begin(),
                      rir.samples.begin() + std::min<long>(delay, static_cast<long>(rir.size())));
    for (double& v : rir.samples) v *= 4.0 * std::numbers::pi * dist;
    AudioSignal wet = apply_rir(dry, rir);
    wet.samples.resize(dry.size());
    return wet;
}

inline TrialResult run_trial(const AudioSignal& dry, const RoomSpec& room, const SolverOptions& o) {
    TrialResult t;
    try {
        const AudioSignal wet = reverberate_for_benchmark(dry, room);
        const ReconstructMethod method = *parse_reconstruct_method(o.method);
        const DereverbResult r = dereverberate(wet, o.stft, o.solver, method);
        t.reverberant = evaluate(dry, wet);
        t.processed = evaluate(dry, r.output);
        t.ok = true;
    } catch (const Error& e) {
        t.error = e.what();
    }
    return t;
}

inline std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
    return {mean, sd};
}

inline int cmd_benchmark(const BenchmarkArgs& a, std::ostream& out, std::ostream& err) {
    return guarded(err, [&]() -> int {
        a.opts.solver.validate();
        a.opts.stft.validate();
        const auto dims = parse_point(a.room);
        if (!dims) throw InvalidGeometry("could not parse --room '" + a.room + "'");
        const std::vector<double> t60s = parse_list(a.t60s);
        if (t60s.empty()) throw InvalidArgument("no T60 conditions given");
        if (!fs::is_directory(a.corpus)) throw IoError("'" + a.corpus + "' is not a directory");

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(a.corpus)) {
            if (entry.is_regular_file() && entry.path().extension() == ".wav") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            err << "error: no .wav files in '" << a.corpus << "'\n";
            return kInvalidArgs;
        }

        const auto t0 = Clock::now();
        const std::size_t trials = files.size() * t60s.size();
        std::vector<TrialResult> results(trials);
        std::vector<std::optional<AudioSignal>> dry(files.size());
        std::vector<std::string> load_errors(files.size());
        for (std::size_t i = 0; i < files.size(); ++i) {
            try {
                dry[i] = read_wav(files[i].string());
            } catch (const Error& e) {
                load_errors[i] = e.what();
            }
        }

        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (std::size_t idx = next++; idx < trials; idx = next++) {
                const std::size_t fi = idx / t60s.size();
                const std::size_t ci = idx % t60s.size();
                if (!dry[fi]) {
                    results[idx].error = load_errors[fi];
                    continue;
                }
                RoomSpec room = benchmark_room(*dims, t60s[ci], a.opts.seed, fi, ci);
                room.sample_rate = dry[fi]->sample_rate;
                results[idx] = run_trial(*dry[fi], room, a.opts);
            }
        };
        const int jobs = std::max(1, a.jobs);
        std::vector<std::thread> pool;
        for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
        worker();
        for (auto& t : pool) t.join();

        std::size_t failures = 0;
        for (std::size_t idx = 0; idx < trials; ++idx) {
            if (!results[idx].ok) {
                ++failures;
                err << "warning: " << files[idx / t60s.size()].filename().string() << " at T60 "
                    << t60s[idx % t60s.size()] << " s failed: " << results[idx].error << '\n';
            }
        }
        if (failures == trials) {
            err << "error: every trial failed\n";
            return kNumericalFailure;
        }

        std::ofstream csv(a.output);
        if (!csv) throw IoError("cannot write '" + a.output + "'");
        csv << "t60,fwssnr_rev_mean,fwssnr_rev_std,fwssnr_der_mean,fwssnr_der_std,"
               "cd_rev_mean,cd_rev_std,cd_der_mean,cd_der_std,n\n";
        csv << std::fixed << std::setprecision(6);

        std::vector<std::size_t> order(t60s.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t x, std::size_t y) { return t60s[x] < t60s[y]; });
        for (std::size_t ci : order) {
            std::vector<double> fr, fd, cr, cd;
            for (std::size_t fi = 0; fi < files.size(); ++fi) {
                const TrialResult& t = results[fi * t60s.size() + ci];
                if (!t.ok) continue;
                fr.push_back(t.reverberant.fwssnr_db);
                fd.push_back(t.processed.fwssnr_db);
                cr.push_back(t.reverberant.cepstral_distance);
                cd.push_back(t.processed.cepstral_distance);
            }
            const auto [fr_m, fr_s] = mean_std(fr);
            const auto [fd_m, fd_s] = mean_std(fd);
            const auto [cr_m, cr_s] = mean_std(cr);
            const auto [cd_m, cd_s] = mean_std(cd);
            csv << std::setprecision(3) << t60s[ci] << std::setprecision(6) << ',' << fr_m << ','
                << fr_s << ',' << fd_m << ',' << fd_s << ',' << cr_m << ',' << cr_s << ',' << cd_m
                << ',' << cd_s << ',' << fr.size() << '\n';
        }

        std::ofstream m(a.output + ".manifest");
        if (!m) throw IoError("cannot write '" + a.output + ".manifest'");
        m << "command=benchmark\n"
          << "corpus=" << a.corpus << '\n'
          << "files=" << files.size() << '\n'
          << "output=" << a.output << '\n'
          << "room=" << a.room << '\n'
          << "t60s=" << a.t60s << '\n'
          << "jobs=" << jobs << '\n';
        write_solver_manifest(m, a.opts);
        m << "failures=" << failures << '\n' << "time_total_s=" << seconds_since(t0) << '\n';

        out << "wrote " << a.output << " (" << trials - failures << '/' << trials
            << " trials succeeded)\n";
        return kOk;
    });
}

// ---------------------------------------------------------------------------
// Entry point

/// Reads `key = value` lines ('#' starts a comment) into flag arguments.
inline std::vector<std::string> config_file_args(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::vector<std::string> args;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        std::replace(key.begin(), key.end(), '_', '-');
        if (key == "rescale" || key == "no-rescale") {
            const bool on = value == "true" || value == "1" || value == "yes";
            args.push_back((key == "rescale") == on ? "--rescale" : "--no-rescale");
            continue;
        }
        args.push_back("--" + key);
        args.push_back(value);
    }
    return args;
}

/// Expands `--config FILE` in place so that later command-line flags win.
inline std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            const auto file_args = config_file_args(args[i + 1]);
            // Insert right after the subcommand name so explicit flags follow.
            const std::size_t at = std::min<std::size_t>(out.size(), 1);
            out.insert(out.begin() + static_cast<long>(at), file_args.begin(), file_args.end());
            ++i;
        } else if (args[i].rfind("--config=", 0) == 0) {
            const auto file_args = config_file_args(args[i].substr(9));
            const std::size_t at = std::min<std::size_t>(out.size(), 1);
            out.insert(out.begin() + static_cast<long>(at), file_args.begin(), file_args.end());
        } else {
            out.push_back(args[i]);
        }
    }
    return out;
}

/// `args` excludes the program name.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
    try {
        args = expand_config(args);
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidArgs;
    }

    CLI::App app{"Blind single-channel dereverberation by convolutive NMF"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string unused_config;

    DereverbArgs d;
    auto* der = app.add_subcommand("dereverb", "dereverberate a WAV file");
    der->add_option("input", d.input, "reverberant input WAV")->required();
    der->add_option("-o,--output", d.output, "output WAV")->required();
    der->add_option("--format", d.format, "pcm16 | float32")
        ->check(CLI::IsMember({"pcm16", "float32"}))
        ->capture_default_str();
    der->add_option("--dump-cost", d.dump_cost, "write the cost history CSV here");
    der->add_option("--dump-spec", d.dump_spec, "write the estimated clean power spectrogram here");
    der->add_option("--config", unused_config, "key = value file; flags override it");
    add_solver_flags(*der, d.opts);

    SimulateArgs s;
    auto* sim = app.add_subcommand("simulate", "generate an image-method RIR");
    sim->add_option("--room", s.room, "room size LxWxH in m")->capture_default_str();
    sim->add_option("--src", s.source, "source position x,y,z in m")->capture_default_str();
    sim->add_option("--mic", s.mic, "microphone position x,y,z in m")->capture_default_str();
    auto* t60 = sim->add_option("--t60", s.t60, "reverberation time in s");
    auto* beta = sim->add_option("--beta", s.reflection, "wall reflection coefficient in [0, 1)");
    t60->excludes(beta);
    sim->add_option("--order", s.order, "per-axis reflection order (-1 = all)")->capture_default_str();
    sim->add_option("--length", s.length_s, "RIR length in s (default 1.2 * t60)");
    sim->add_option("--fs", s.sample_rate, "sample rate")->capture_default_str();
    sim->add_option("--c", s.speed_of_sound, "speed of sound in m/s")->capture_default_str();
    sim->add_option("--conversion", s.conversion, "sabine | image_decay")
        ->check(CLI::IsMember({"image_decay", "sabine"}))
        ->capture_default_str();
    sim->add_flag("--no-high-pass", s.no_high_pass, "skip the 100 Hz DC-removal filter");
    sim->add_option("--out", s.rir_out, "RIR output WAV");
    sim->add_option("--dry", s.dry, "dry input WAV to reverberate");
    sim->add_option("--reverb-out", s.reverb_out, "reverberant output WAV (peak 0.9)");
    sim->add_option("--format", s.format, "pcm16 | float32")
        ->check(CLI::IsMember({"pcm16", "float32"}))
        ->capture_default_str();

    EvaluateArgs e;
    auto* ev = app.add_subcommand("evaluate", "fwsSNR and cepstral distance against a reference");
    ev->add_option("clean", e.clean, "reference WAV")->required();
    ev->add_option("test", e.test, "WAV under test")->required();
    ev->add_option("--csv", e.csv, "append file,fwssnr_db,cepstral_distance,frames_used");

    BenchmarkArgs b;
    auto* bench = app.add_subcommand("benchmark", "simulate, dereverberate and score a corpus");
    bench->add_option("corpus", b.corpus, "directory of dry WAV files")->required();
    bench->add_option("-o,--output", b.output, "per-T60 summary CSV")->required();
    bench->add_option("--t60s", b.t60s, "comma-separated T60 conditions")->capture_default_str();
    bench->add_option("--room", b.room, "room size LxWxH in m")->capture_default_str();
    bench->add_option("--jobs", b.jobs, "worker threads")->capture_default_str();
    bench->add_option("--config", unused_config, "key = value file; flags override it");
    add_solver_flags(*bench, b.opts);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& pe) {
        if (pe.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << pe.what() << '\n';
        return kInvalidArgs;
    }

    if (der->parsed()) return cmd_dereverb(d, out, err);
    if (sim->parsed()) return cmd_simulate(s, out, err);
    if (ev->parsed()) return cmd_evaluate(e, out, err);
    return cmd_benchmark(b, out, err);
}

}  // namespace cnmf::cli

#endif  // CNMF_TOOLS_CLI_HPP

// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/cli.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "wavevid/decoder.hpp"
#include "wavevid/encoder.hpp"
#include "wavevid/error.hpp"
#include "wavevid/image_io.hpp"
#include "wavevid/projection.hpp"
#include "wavevid/quality.hpp"
#include "wavevid/service.hpp"

namespace wavevid {
namespace {

namespace fs = std::filesystem;

// Raised for option combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const CLI::Validator kPowerOfTwo(
    [](std::string& text) -> std::string {
        std::uint32_t v = 0;
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc() || end != text.data() + text.size() || v == 0 || (v & (v - 1)) || v > 256)
            return "must be a power of two in [1, 256]";
        return {};
    },
    "POW2<=256");

std::optional<std::uint32_t> parse_levels(const std::string& text) {
    if (text == "auto") return std::nullopt;
    std::uint32_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || end != text.data() + text.size() || v < 1 || v > 31)
        throw UsageError("--levels must be 'auto' or an integer in [1, 31]");
    return v;
}

void write_image(const Frame& frame, const fs::path& path) {
    if (path.extension() == ".bmp") {
        const auto bytes = encode_bmp(frame);
        std::ofstream out(path, std::ios::binary);
        out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
        if (!out) throw Error("cannot write " + path.string());
    } else {
        write_pnm(frame, path);
    }
}

struct EncodeArgs {
    std::string input, output, levels = "auto", mapping = "none";
    EncodeParams params;
    std::uint32_t mask_width = 0, mask_height = 0;
    bool no_quantize = false;
};

int encode(const EncodeArgs& a, std::ostream& out) {
    EncodeParams p = a.params;
    p.levels = parse_levels(a.levels);
    p.mapping = a.mapping == "equirect" ? Mapping::Equirectangular : Mapping::None;
    p.quantize = !a.no_quantize;
    if (a.mask_width) p.mask_width = a.mask_width;
    if (a.mask_height) p.mask_height = a.mask_height;
    const std::vector<Frame> frames = read_frames(a.input);
    const EncodedVideo video = encode_video(frames, p);
    const std::uint64_t bytes = write_video(video, a.output);
    const VideoHeader& h = video.header;
    const double raw = double(h.width) * h.height * h.channels * h.frame_count;
    out << "frames=" << h.frame_count << "\nwidth=" << h.width << "\nheight=" << h.height
        << "\nlevels=" << unsigned(h.levels) << "\nfile_bytes=" << bytes << "\ncompression_ratio=" << raw / double(bytes)
        << "\n";
    return kExitOk;
}

struct ViewArgs {
    double yaw = 0, pitch = 0, roll = 0, fov_h = 90, fov_v = 90;
    CameraPose pose() const { return {yaw, pitch, roll, fov_h, fov_v}; }
};

struct DecodeArgs {
    std::string input, output;
    std::uint32_t frame = 0;
    ViewArgs view;
    bool foveate = false, full = false;
    double gaze_u = 0.5, gaze_v = 0.5;
    std::uint32_t view_width = 0, view_height = 0;
    int eye = 0;
};

int decode(const DecodeArgs& a, std::ostream& out) {
    auto file = std::make_shared<const VideoFile>(a.input);
    const VideoHeader& h = file->header();
    if (a.frame >= h.frame_count)
        throw RangeError("frame " + std::to_string(a.frame) + " out of range (" + std::to_string(h.frame_count) +
                         " frames)");
    const CameraPose pose = a.view.pose();
    pose.validate();
    DecodeSession session(file);
    DecodeResult r;
    if (a.full) {
        r = session.decode_full(a.frame);
    } else {
        const ViewportMask mask = viewport_to_mask(pose, h.mask_width, h.mask_height, h.stereo());
        if (a.foveate) {
            const auto schedule = FoveationSchedule::standard(h.levels, a.gaze_u, a.gaze_v);
            schedule.validate(h.levels);
            r = session.decode_foveated(a.frame, mask, schedule);
        } else {
            r = session.decode_viewport(a.frame, mask);
        }
    }
    if (a.view_width && a.view_height)
        write_image(render_perspective({r.pixels, r.computed}, pose, a.view_width, a.view_height, h.stereo(), a.eye),
                    a.output);
    else
        write_image(r.pixels, a.output);
    out << "bytes_loaded=" << r.stats.bytes_loaded << "\nrecords=" << r.stats.records << "\nreads=" << r.stats.reads
        << "\ndecode_ms=" << r.stats.total_ms << "\n";
    return kExitOk;
}

int inspect(const std::string& input, std::ostream& out) {
    const VideoFile file(input);
    const VideoHeader& h = file.header();
    const BlockLayout layout = h.layout();
    out << "magic=WVVC\nversion=" << h.version << "\nwidth=" << h.width << "\nheight=" << h.height
        << "\nchannels=" << unsigned(h.channels) << "\nframe_count=" << h.frame_count << "\nfps=" << h.fps
        << "\nlevels=" << unsigned(h.levels) << "\ninter_size=" << h.inter_size()
        << "\nblock_size=" << h.block_size() << "\nmask_width=" << h.mask_width << "\nmask_height=" << h.mask_height
        << "\npad_frames=" << unsigned(h.pad_frames) << "\nstereo=" << h.stereo()
        << "\nraw=" << bool(h.flags & kFlagRawCoefficients) << "\nequirect_threshold=" << bool(h.flags & kFlagEquirectThreshold)
        << "\nset_count=" << h.set_count() << "\nfile_bytes=" << file.file_size() << "\n";
    std::uint64_t total = 0, approx_total = 0;
    for (std::uint32_t s = 0; s < h.set_count(); ++s) {
        const SetMeta& meta = file.set(s);
        const SparseCoefficients records = file.read_set(s);
        std::uint64_t approx = 0;
        for (const RecordKey& k : records.keys) {
            const auto p = layout.position_of(k.block, k.offset);
            approx += layout.in_approx_band(p.x, p.y);
        }
        out << "set." << s << ".offset=" << meta.payload_offset << "\nset." << s << ".bytes=" << meta.payload_length
            << "\nset." << s << ".record_count=" << meta.record_count << "\nset." << s
            << ".approx_record_count=" << approx << "\nset." << s
            << ".detail_record_count=" << meta.record_count - approx << "\n";
        total += meta.record_count;
        approx_total += approx;
    }
    out << "record_count=" << total << "\napprox_record_count=" << approx_total
        << "\ndetail_record_count=" << total - approx_total << "\n";
    return kExitOk;
}

struct BenchArgs {
    std::string input, trajectory, mode = "viewport", reference, json;
    ReplayOptions options;
    bool no_prefetch = false;
};

int bench(BenchArgs a, std::ostream& out) {
    a.options.mode = parse_replay_mode(a.mode);
    a.options.prefetch = !a.no_prefetch;
    const TrajectoryLog trajectory = TrajectoryLog::load(a.trajectory);
    std::vector<Frame> reference;
    if (!a.reference.empty()) reference = read_frames(a.reference);
    const BenchReport report = replay(a.input, trajectory, a.options, reference);
    out << report.to_text();
    std::optional<double> reduction;
    if (a.options.mode == ReplayMode::Foveated) {
        // Byte counters are deterministic, so one untimed comparison run is enough.
        ReplayOptions baseline = a.options;
        baseline.mode = ReplayMode::Viewport;
        baseline.runs = 1;
        const BenchReport viewport = replay(a.input, trajectory, baseline);
        reduction = viewport.bytes_total ? 1.0 - double(report.bytes_total) / double(viewport.bytes_total) : 0.0;
        out << "viewport_bytes_total=" << viewport.bytes_total << "\nbytes_reduction_vs_viewport=" << *reduction
            << "\n";
    }
    if (!a.json.empty()) {
        std::ofstream f(a.json);
        f << report.to_json() << "\n";
        if (!f) throw Error("cannot write " + a.json);
    }
    return kExitOk;
}

struct SynthArgs {
    std::string output, style = "smooth";
    std::uint32_t width = 512, height = 512, frames = 16, seed = 1;
};

int synth(const SynthArgs& a, std::ostream& out) {
    const auto frames = synthetic_clip(a.width, a.height, a.frames, a.seed,
                                       a.style == "detailed" ? ClipStyle::Detailed : ClipStyle::Smooth);
    fs::create_directories(a.output);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        std::ostringstream name;
        name << "frame_" << std::setw(4) << std::setfill('0') << i << ".ppm";
        write_pnm(frames[i], fs::path(a.output) / name.str());
    }
    out << "frames=" << frames.size() << "\n";
    return kExitOk;
}

struct TrajectoryArgs {
    std::string output;
    std::uint32_t frames = 16;
    double fps = 30, yaw = 0, pitch = 0, yaw_rate = 0, gaze_u = 0.5, gaze_v = 0.5;
};

int trajectory(const TrajectoryArgs& a, std::ostream& out) {
    TrajectoryLog log;
    for (std::uint32_t f = 0; f < a.frames; ++f) {
        const double t = f * 1000.0 / a.fps;
        double yaw = std::fmod(a.yaw + a.yaw_rate * t / 1000.0 + 180.0, 360.0);
        if (yaw < 0) yaw += 360.0;
        log.samples.push_back({t, yaw - 180.0, a.pitch, 0.0, a.gaze_u, a.gaze_v});
    }
    log.validate();
    std::ofstream f(a.output);
    log.write(f);
    if (!f) throw Error("cannot write " + a.output);
    out << "samples=" << log.samples.size() << "\n";
    return kExitOk;
}

void add_view_options(CLI::App* cmd, ViewArgs& v) {
    cmd->add_option("--yaw", v.yaw, "Camera yaw in degrees")->capture_default_str();
    cmd->add_option("--pitch", v.pitch, "Camera pitch in degrees")->capture_default_str()->check(CLI::Range(-90.0, 90.0));
    cmd->add_option("--roll", v.roll, "Camera roll in degrees")->capture_default_str();
    cmd->add_option("--fov-h", v.fov_h, "Horizontal field of view in degrees, (0, 360]")
        ->capture_default_str()
        ->check(CLI::Range(1e-6, 360.0));
    cmd->add_option("--fov-v", v.fov_v, "Vertical field of view in degrees, (0, 180]")
        ->capture_default_str()
        ->check(CLI::Range(1e-6, 180.0));
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wavelet-based viewport-adaptive video codec"};
    app.name("wavevid");
    app.require_subcommand(1, 1);
    app.fallthrough(false);

    EncodeArgs enc;
    auto* encode_cmd = app.add_subcommand("encode", "Encode a directory of PPM/PGM frames (or one concatenated file)");
    encode_cmd->add_option("--input", enc.input, "Frame directory or multi-image PNM file")->required();
    encode_cmd->add_option("--output", enc.output, "Output .wvv file")->required();
    encode_cmd
        ->add_option("--alpha", enc.params.alpha,
                     "Frame-wise threshold constant: 0.1 high quality, 0.25 low quality, 0 keeps every coefficient")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    encode_cmd
        ->add_option("--inter-threshold", enc.params.inter_threshold,
                     "Temporal threshold constant applied to the inter-frame detail coefficients")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    encode_cmd
        ->add_option("--levels", enc.levels,
                     "Spatial levels, or 'auto' for log2(width/32) - 2 clamped to [1, log2(min(width, height))]")
        ->capture_default_str();
    encode_cmd->add_option("--inter-size", enc.params.inter_size, "Frames per inter-frame set (n), power of two")
        ->capture_default_str()
        ->check(kPowerOfTwo);
    encode_cmd->add_option("--block", enc.params.block_size, "Coefficient block edge, power of two")
        ->capture_default_str()
        ->check(kPowerOfTwo);
    encode_cmd->add_flag("--no-quantize", enc.no_quantize, "Store raw floats instead of 8-bit values");
    encode_cmd->add_option("--mapping", enc.mapping, "Threshold weighting: none or equirect")
        ->capture_default_str()
        ->check(CLI::IsMember({"none", "equirect"}));
    encode_cmd->add_flag("--stereo", enc.params.stereo, "Frames hold two eyes stacked top-bottom");
    encode_cmd->add_option("--fps", enc.params.fps, "Playback rate stored in the header")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    encode_cmd->add_option("--mask-width", enc.mask_width, "Viewport mask columns (default: min(256, width/8))");
    encode_cmd->add_option("--mask-height", enc.mask_height, "Viewport mask rows (default: min(256, height/8))");
    encode_cmd->add_option("--threads", enc.params.threads, "Worker threads (0: WAVEVID_THREADS or all cores)")
        ->capture_default_str();

    DecodeArgs dec;
    auto* decode_cmd = app.add_subcommand("decode", "Decode one frame for a camera pose");
    decode_cmd->add_option("--input", dec.input, "Input .wvv file")->required();
    decode_cmd->add_option("--frame", dec.frame, "Frame index")->required();
    add_view_options(decode_cmd, dec.view);
    decode_cmd->add_option("--out", dec.output, "Output image (.ppm/.pgm, or .bmp)")->required();
    decode_cmd->add_flag("--foveate", dec.foveate, "Shrink finer levels toward the gaze point");
    decode_cmd->add_option("--gaze-u", dec.gaze_u, "Gaze position across the viewport, [0, 1]")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    decode_cmd->add_option("--gaze-v", dec.gaze_v, "Gaze position down the viewport, [0, 1]")
        ->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    decode_cmd->add_flag("--full", dec.full, "Decode the whole frame regardless of pose");
    decode_cmd->add_option("--view-width", dec.view_width,
                           "Render a perspective view of this width instead of writing the frame");
    decode_cmd->add_option("--view-height", dec.view_height, "Height of the rendered view");
    decode_cmd->add_option("--eye", dec.eye, "Eye to render for stereo input")->check(CLI::Range(0, 1));

    std::string inspect_input;
    auto* inspect_cmd = app.add_subcommand("inspect", "Print header, per-set sizes and record counts");
    inspect_cmd->add_option("--input", inspect_input, "Input .wvv file")->required();

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "Replay a head/gaze trajectory and report decode cost");
    bench_cmd->add_option("--input", bench_args.input, "Input .wvv file")->required();
    bench_cmd->add_option("--trajectory", bench_args.trajectory, "CSV with t_ms,yaw,pitch,roll,gaze_u,gaze_v")
        ->required();
    bench_cmd->add_option("--mode", bench_args.mode, "full, viewport or foveated")
        ->capture_default_str()
        ->check(CLI::IsMember({"full", "viewport", "foveated"}));
    bench_cmd->add_option("--reference", bench_args.reference, "Original frames for PSNR/SSIM");
    bench_cmd->add_option("--runs", bench_args.options.runs, "Timed runs after one discarded warmup")
        ->capture_default_str()
        ->check(CLI::Range(1, 1000));
    bench_cmd->add_option("--fov-h", bench_args.options.fov_h, "Horizontal field of view in degrees")
        ->capture_default_str()
        ->check(CLI::Range(1e-6, 360.0));
    bench_cmd->add_option("--fov-v", bench_args.options.fov_v, "Vertical field of view in degrees")
        ->capture_default_str()
        ->check(CLI::Range(1e-6, 180.0));
    bench_cmd->add_flag("--no-prefetch", bench_args.no_prefetch, "Disable next-set prefetch");
    bench_cmd->add_option("--json", bench_args.json, "Also write the report as JSON");
    bench_cmd->add_option("--threads", bench_args.options.threads, "Worker threads (0: WAVEVID_THREADS or all cores)");

    std::string serve_input;
    ServiceOptions serve_options;
    auto* serve_cmd = app.add_subcommand("serve", "Serve viewport-dependent decoding over HTTP");
    serve_cmd->add_option("--input", serve_input, "Input .wvv file")->required();
    serve_cmd->add_option("--port", serve_options.port, "TCP port (0 picks a free one)")
        ->capture_default_str()
        ->check(CLI::Range(0, 65535));
    serve_cmd->add_option("--host", serve_options.host, "Listen address")->capture_default_str();
    serve_cmd->add_option("--threads", serve_options.threads, "Decode worker threads per request");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "Write a deterministic synthetic clip as PPM frames");
    synth_cmd->add_option("--output", synth_args.output, "Output directory")->required();
    synth_cmd->add_option("--width", synth_args.width)->capture_default_str()->check(CLI::Range(1u, 16384u));
    synth_cmd->add_option("--height", synth_args.height)->capture_default_str()->check(CLI::Range(1u, 16384u));
    synth_cmd->add_option("--frames", synth_args.frames)->capture_default_str()->check(CLI::Range(1u, 100000u));
    synth_cmd->add_option("--style", synth_args.style, "smooth or detailed")
        ->capture_default_str()
        ->check(CLI::IsMember({"smooth", "detailed"}));
    synth_cmd->add_option("--seed", synth_args.seed)->capture_default_str();

    TrajectoryArgs traj;
    auto* traj_cmd = app.add_subcommand("trajectory", "Write a constant-rate head trajectory CSV");
    traj_cmd->add_option("--output", traj.output, "Output CSV")->required();
    traj_cmd->add_option("--frames", traj.frames)->capture_default_str()->check(CLI::Range(1u, 1000000u));
    traj_cmd->add_option("--fps", traj.fps)->capture_default_str()->check(CLI::PositiveNumber);
    traj_cmd->add_option("--yaw", traj.yaw, "Starting yaw in degrees")->capture_default_str();
    traj_cmd->add_option("--pitch", traj.pitch)->capture_default_str()->check(CLI::Range(-90.0, 90.0));
    traj_cmd->add_option("--yaw-rate", traj.yaw_rate, "Degrees per second")->capture_default_str();
    traj_cmd->add_option("--gaze-u", traj.gaze_u)->capture_default_str()->check(CLI::Range(0.0, 1.0));
    traj_cmd->add_option("--gaze-v", traj.gaze_v)->capture_default_str()->check(CLI::Range(0.0, 1.0));

    const std::string footer =
        "Codec defaults: --alpha 0.1 (high quality; 0.25 for low quality), --inter-threshold 0.005, "
        "--inter-size 4 (n = 4 frames per set), --levels auto.";
    app.footer(footer);
    for (CLI::App* sub : app.get_subcommands({})) sub->footer(footer);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (*encode_cmd) return encode(enc, out);
        if (*decode_cmd) return decode(dec, out);
        if (*inspect_cmd) return inspect(inspect_input, out);
        if (*bench_cmd) return bench(bench_args, out);
        if (*synth_cmd) return synth(synth_args, out);
        if (*traj_cmd) return trajectory(traj, out);
        if (*serve_cmd) {
            StreamService service(serve_input, serve_options);
            const int port = service.bind();
            out << "listening on http://" << serve_options.host << ":" << port << std::endl;
            service.listen();
            return kExitOk;
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace wavevid

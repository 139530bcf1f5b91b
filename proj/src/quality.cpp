// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/quality.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "wavevid/error.hpp"

namespace wavevid {
namespace {

void check_same(const Frame& a, const Frame& b) {
    if (!a.same_shape(b)) throw DimensionError("images differ in shape");
    if (a.pixels.empty()) throw DimensionError("empty image");
}

std::vector<double> luminance(const Frame& f) {
    std::vector<double> l(std::size_t(f.width) * f.height);
    for (std::size_t i = 0; i < l.size(); ++i) {
        double s = 0;
        for (std::uint32_t c = 0; c < f.channels; ++c) s += f.pixels[i * f.channels + c];
        l[i] = s / f.channels;
    }
    return l;
}

// Summed-area table with one row and column of zero padding.
std::vector<double> integral(const std::vector<double>& v, std::uint32_t w, std::uint32_t h) {
    std::vector<double> s(std::size_t(w + 1) * (h + 1), 0.0);
    for (std::uint32_t y = 0; y < h; ++y) {
        double row = 0;
        for (std::uint32_t x = 0; x < w; ++x) {
            row += v[std::size_t(y) * w + x];
            s[std::size_t(y + 1) * (w + 1) + x + 1] = s[std::size_t(y) * (w + 1) + x + 1] + row;
        }
    }
    return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("trajectory line " + std::to_string(line) + ": '" + s + "' is not a number");
    }
}

double smoothstep(double e0, double e1, double x) {
    const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
    return t * t * (3 - 2 * t);
}

}  // namespace

double psnr(const Frame& a, const Frame& b, const BitGrid* region) {
    check_same(a, b);
    if (region && (region->width != a.width || region->height != a.height))
        throw DimensionError("region does not match the images");
    double sum = 0;
    std::size_t count = 0;
    const std::size_t pixels = std::size_t(a.width) * a.height;
    for (std::size_t i = 0; i < pixels; ++i) {
        if (region && !region->data[i]) continue;
        for (std::uint32_t c = 0; c < a.channels; ++c) {
            const double d = double(a.pixels[i * a.channels + c]) - b.pixels[i * a.channels + c];
            sum += d * d;
        }
        count += a.channels;
    }
    if (count == 0) throw DimensionError("empty comparison region");
    if (sum == 0) return kPsnrCap;
    return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / (sum / double(count))));
}

double ssim(const Frame& a, const Frame& b) {
    check_same(a, b);
    const std::uint32_t w = a.width, h = a.height;
    const std::uint32_t win = std::min({8u, w, h});
    const auto la = luminance(a), lb = luminance(b);
    std::vector<double> aa(la.size()), bb(la.size()), ab(la.size());
    for (std::size_t i = 0; i < la.size(); ++i) {
        aa[i] = la[i] * la[i];
        bb[i] = lb[i] * lb[i];
        ab[i] = la[i] * lb[i];
    }
    const auto sa = integral(la, w, h), sb = integral(lb, w, h);
    const auto saa = integral(aa, w, h), sbb = integral(bb, w, h), sab = integral(ab, w, h);
    const double c1 = (0.01 * 255) * (0.01 * 255), c2 = (0.03 * 255) * (0.03 * 255);
    const double n = double(win) * win;
    auto box = [&](const std::vector<double>& s, std::uint32_t x, std::uint32_t y) {
        const std::size_t W = w + 1;
        return s[(y + win) * W + x + win] - s[y * W + x + win] - s[(y + win) * W + x] + s[y * W + x];
    };
    double total = 0;
    std::size_t windows = 0;
    for (std::uint32_t y = 0; y + win <= h; ++y)
        for (std::uint32_t x = 0; x + win <= w; ++x) {
            const double ma = box(sa, x, y) / n, mb = box(sb, x, y) / n;
            const double va = box(saa, x, y) / n - ma * ma;
            const double vb = box(sbb, x, y) / n - mb * mb;
            const double cov = box(sab, x, y) / n - ma * mb;
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++windows;
        }
    return total / double(windows);
}

TrajectoryLog TrajectoryLog::parse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty trajectory");
    std::vector<std::string> head = split(line, ',');
    for (auto& s : head) s = trim(s);
    if (head != std::vector<std::string>{"t_ms", "yaw", "pitch", "roll", "gaze_u", "gaze_v"})
        throw DataError("trajectory header must be t_ms,yaw,pitch,roll,gaze_u,gaze_v");
    TrajectoryLog log;
    std::size_t number = 1;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 6) throw DataError("trajectory line " + std::to_string(number) + " needs six fields");
        double v[6];
        for (int i = 0; i < 6; ++i) v[i] = parse_double(trim(f[std::size_t(i)]), number);
        log.samples.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    }
    log.validate();
    return log;
}

TrajectoryLog TrajectoryLog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    return parse(in);
}

void TrajectoryLog::write(std::ostream& out) const {
    out << "t_ms,yaw,pitch,roll,gaze_u,gaze_v\n";
    for (const auto& s : samples)
        out << s.t_ms << ',' << s.yaw << ',' << s.pitch << ',' << s.roll << ',' << s.gaze_u << ',' << s.gaze_v
            << '\n';
}

void TrajectoryLog::validate() const {
    if (samples.empty()) throw RangeError("trajectory has no samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const std::string where = "trajectory sample " + std::to_string(i) + ": ";
        if (!std::isfinite(s.t_ms) || (i && !(s.t_ms > samples[i - 1].t_ms)))
            throw RangeError(where + "timestamps must increase strictly");
        if (!std::isfinite(s.yaw) || !std::isfinite(s.roll) || !(s.pitch >= -90 && s.pitch <= 90))
            throw RangeError(where + "angle out of range");
        if (!(s.gaze_u >= 0 && s.gaze_u <= 1 && s.gaze_v >= 0 && s.gaze_v <= 1))
            throw RangeError(where + "gaze out of [0, 1]");
    }
}

const TrajectorySample& TrajectoryLog::at(double t_ms) const {
    if (samples.empty()) throw RangeError("trajectory has no samples");
    auto it = std::upper_bound(samples.begin(), samples.end(), t_ms,
                               [](double t, const TrajectorySample& s) { return t < s.t_ms; });
    return it == samples.begin() ? samples.front() : *std::prev(it);
}

const char* to_string(ReplayMode mode) {
    switch (mode) {
        case ReplayMode::Full: return "full";
        case ReplayMode::Viewport: return "viewport";
        case ReplayMode::Foveated: return "foveated";
    }
    return "?";
}

ReplayMode parse_replay_mode(const std::string& text) {
    if (text == "full") return ReplayMode::Full;
    if (text == "viewport") return ReplayMode::Viewport;
    if (text == "foveated") return ReplayMode::Foveated;
    throw RangeError("unknown mode '" + text + "' (expected full, viewport or foveated)");
}

std::string BenchReport::to_text() const {
    std::ostringstream o;
    o.precision(10);
    o << "mode=" << to_string(mode) << '\n'
      << "runs=" << runs << '\n'
      << "frames=" << frames.size() << '\n'
      << "mean_ms=" << mean_ms << '\n'
      << "fps=" << fps << '\n'
      << "bytes_total=" << bytes_total << '\n'
      << "records_total=" << records_total << '\n'
      << "file_bytes=" << file_bytes << '\n'
      << "raw_bytes=" << raw_bytes << '\n'
      << "compression_ratio=" << compression_ratio << '\n';
    if (psnr_mean) o << "psnr_mean=" << *psnr_mean << '\n';
    if (ssim_mean) o << "ssim_mean=" << *ssim_mean << '\n';
    for (const auto& f : frames) {
        const std::string p = "frame." + std::to_string(f.frame) + ".";
        o << p << "ms=" << f.ms << '\n' << p << "bytes=" << f.bytes << '\n' << p << "records=" << f.records << '\n';
        if (f.psnr) o << p << "psnr=" << *f.psnr << '\n';
        if (f.ssim) o << p << "ssim=" << *f.ssim << '\n';
    }
    return o.str();
}

std::string BenchReport::to_json() const {
    nlohmann::json j;
    j["mode"] = to_string(mode);
    j["runs"] = runs;
    j["mean_ms"] = mean_ms;
    j["fps"] = fps;
    j["bytes_total"] = bytes_total;
    j["records_total"] = records_total;
    j["file_bytes"] = file_bytes;
    j["raw_bytes"] = raw_bytes;
    j["compression_ratio"] = compression_ratio;
    if (psnr_mean) j["psnr_mean"] = *psnr_mean;
    if (ssim_mean) j["ssim_mean"] = *ssim_mean;
    j["frames"] = nlohmann::json::array();
    for (const auto& f : frames) {
        nlohmann::json e{{"frame", f.frame}, {"ms", f.ms}, {"bytes", f.bytes}, {"records", f.records}};
        if (f.psnr) e["psnr"] = *f.psnr;
        if (f.ssim) e["ssim"] = *f.ssim;
        j["frames"].push_back(std::move(e));
    }
    return j.dump(2);
}

BenchReport replay(const std::filesystem::path& video, const TrajectoryLog& trajectory, const ReplayOptions& options,
                   std::span<const Frame> reference) {
    trajectory.validate();
    if (options.runs == 0) throw RangeError("replay needs at least one timed run");
    auto file = std::make_shared<const VideoFile>(video);
    const VideoHeader& h = file->header();
    if (!reference.empty() && reference.size() < h.frame_count)
        throw DimensionError("fewer reference frames than video frames");
    const FoveationSchedule schedule = options.schedule.value_or(FoveationSchedule::standard(h.levels));
    const double frame_ms = 1000.0 / h.fps;

    struct Step {
        CameraPose pose;
        ViewportMask mask;
        FoveationSchedule schedule;
    };
    std::vector<Step> steps;
    for (std::uint32_t f = 0; f < h.frame_count; ++f) {
        const auto& s = trajectory.at(trajectory.samples.front().t_ms + f * frame_ms);
        CameraPose pose{s.yaw, s.pitch, s.roll, options.fov_h, options.fov_v};
        FoveationSchedule fs = schedule;
        fs.gaze_u = s.gaze_u;
        fs.gaze_v = s.gaze_v;
        steps.push_back({pose, viewport_to_mask(pose, h.mask_width, h.mask_height, h.stereo()), fs});
    }

    BenchReport report;
    report.mode = options.mode;
    report.runs = options.runs;
    report.frames.resize(h.frame_count);
    for (std::uint32_t run = 0; run <= options.runs; ++run) {
        DecodeSession session(file, options.threads);
        for (std::uint32_t f = 0; f < h.frame_count; ++f) {
            const Step& st = steps[f];
            const auto start = std::chrono::steady_clock::now();
            DecodeResult r = options.mode == ReplayMode::Full       ? session.decode_full(f)
                             : options.mode == ReplayMode::Viewport ? session.decode_viewport(f, st.mask)
                                                                    : session.decode_foveated(f, st.mask, st.schedule);
            const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            if (options.prefetch && f % h.inter_size() == 0) {
                if (options.mode == ReplayMode::Full)
                    session.advance(ViewportMask{BitGrid(h.mask_width, h.mask_height, 1)});
                else
                    session.advance(st.mask, options.mode == ReplayMode::Foveated
                                                 ? std::optional(st.schedule)
                                                 : std::nullopt);
            }
            if (run == 0) continue;  // warmup
            FrameReport& fr = report.frames[f];
            fr.frame = f;
            fr.ms += ms / options.runs;
            if (run == 1) {
                fr.bytes = r.stats.bytes_loaded;
                fr.records = r.stats.records;
                if (!reference.empty()) {
                    const int eye = 0;
                    const Frame view = render_perspective({r.pixels, r.computed}, st.pose, options.view_width,
                                                          options.view_height, h.stereo(), eye);
                    const BitGrid all(h.width, h.height, 1);
                    const Frame ref = render_perspective({reference[f], all}, st.pose, options.view_width,
                                                         options.view_height, h.stereo(), eye);
                    fr.psnr = psnr(view, ref);
                    fr.ssim = ssim(view, ref);
                }
            }
        }
    }

    double ms = 0, ps = 0, ss = 0;
    for (const auto& f : report.frames) {
        ms += f.ms;
        report.bytes_total += f.bytes;
        report.records_total += f.records;
        if (f.psnr) ps += *f.psnr;
        if (f.ssim) ss += *f.ssim;
    }
    const double n = double(report.frames.size());
    report.mean_ms = n ? ms / n : 0;
    report.fps = report.mean_ms > 0 ? 1000.0 / report.mean_ms : 0;
    report.file_bytes = file->file_size();
    report.raw_bytes = std::uint64_t(h.frame_count) * h.width * h.height * h.channels;
    report.compression_ratio = double(report.raw_bytes) / double(report.file_bytes);
    if (!reference.empty() && n) {
        report.psnr_mean = ps / n;
        report.ssim_mean = ss / n;
    }
    return report;
}

std::vector<Frame> synthetic_clip(std::uint32_t width, std::uint32_t height, std::uint32_t frames,
                                  std::uint32_t seed, ClipStyle style) {
    if (width == 0 || height == 0) throw DimensionError("empty clip");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    struct Shape {
        double x, y, r, vx, vy, rgb[3];
        bool square;
    };
    const double side = std::min(width, height);
    std::vector<Shape> shapes;
    for (int i = 0; i < 4; ++i)
        shapes.push_back({u(rng) * width, (0.25 + 0.5 * u(rng)) * height, (0.06 + 0.06 * u(rng)) * side,
                          (u(rng) - 0.5) * 0.02 * width, (u(rng) - 0.5) * 0.01 * height, {u(rng), u(rng), u(rng)},
                          i == 3});
    const bool detailed = style == ClipStyle::Detailed;
    if (detailed)
        for (int i = 0; i < 12; ++i)
            shapes.push_back({u(rng) * width, (0.1 + 0.8 * u(rng)) * height, (0.015 + 0.04 * u(rng)) * side,
                              (u(rng) - 0.5) * 0.02 * width, (u(rng) - 0.5) * 0.01 * height,
                              {u(rng), u(rng), u(rng)}, i % 3 == 0});
    const double phase = u(rng) * 2 * std::numbers::pi;
    const double pi = std::numbers::pi;
    std::vector<Frame> clip;
    for (std::uint32_t t = 0; t < frames; ++t) {
        Frame f(width, height, 3);
        for (std::uint32_t y = 0; y < height; ++y)
            for (std::uint32_t x = 0; x < width; ++x) {
                const double fx = double(x) / width, fy = double(y) / height;
                double c[3] = {0.5 + 0.3 * std::sin(2 * pi * (fx + 0.01 * t) + phase),
                               0.5 + 0.3 * std::cos(pi * fy + 0.03 * t),
                               0.45 + 0.2 * std::sin(2 * pi * (fx + fy) - 0.05 * t)};
                if (detailed) {
                    // Ground-like texture below the horizon, drifting sideways.
                    const double xs = x * 512.0 / width + 0.8 * t, ys = y * 512.0 / height;
                    const double g = 0.15 * std::sin(xs * 0.9 + 3 * std::sin(ys * 0.05)) *
                                     std::sin(ys * 0.7 + 2 * std::sin(xs * 0.03)) * smoothstep(0.5, 0.56, fy);
                    for (double& v : c) v += g;
                }
                for (const auto& s : shapes) {
                    double dx = x + 0.5 - (s.x + s.vx * t), dy = y + 0.5 - (s.y + s.vy * t);
                    dx -= width * std::round(dx / width);  // shapes wrap horizontally
                    const double d = s.square ? std::max(std::abs(dx), std::abs(dy)) : std::hypot(dx, dy);
                    const double a = 1 - smoothstep(s.r - 1.5, s.r + 1.5, d);
                    for (int k = 0; k < 3; ++k) c[k] = c[k] * (1 - a) + s.rgb[k] * a;
                }
                for (int k = 0; k < 3; ++k)
                    f.at(x, y, std::uint32_t(k)) = std::uint8_t(std::clamp(std::lround(c[k] * 255), 0L, 255L));
            }
        clip.push_back(std::move(f));
    }
    return clip;
}

}  // namespace wavevid

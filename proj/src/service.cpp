// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include "wavevid/service.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "wavevid/decoder.hpp"
#include "wavevid/error.hpp"
#include "wavevid/image_io.hpp"
#include "wavevid/projection.hpp"

namespace wavevid {
namespace {

constexpr std::uint32_t kMaxOutput = 4096;

struct BadRequest : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double number_param(const httplib::Request& req, const char* name, double fallback) {
    if (!req.has_param(name)) return fallback;
    const std::string v = req.get_param_value(name);
    double out = 0;
    const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || end != v.data() + v.size() || !std::isfinite(out))
        throw BadRequest(std::string("parameter ") + name + " must be a decimal number");
    return out;
}

std::uint32_t count_param(const httplib::Request& req, const char* name, std::uint32_t fallback,
                          std::uint32_t max) {
    const double v = number_param(req, name, fallback);
    if (v != std::floor(v) || v < 0 || v > max)
        throw BadRequest(std::string("parameter ") + name + " must be an integer in [0, " + std::to_string(max) + "]");
    return std::uint32_t(v);
}

std::string format_ms(double ms) {
    std::ostringstream o;
    o.precision(6);
    o << std::fixed << ms;
    return o.str();
}

}  // namespace

struct StreamService::Impl {
    struct Client {
        std::mutex mutex;
        std::unique_ptr<DecodeSession> session;
    };

    std::shared_ptr<const VideoFile> file;
    ServiceOptions options;
    httplib::Server server;
    std::thread thread;
    int bound_port = -1;

    std::mutex clients_mutex;
    std::map<std::string, std::shared_ptr<Client>> clients;
    std::list<std::string> recency;  // most recent first

    std::mutex stats_mutex;
    DecodeStats totals;
    std::uint64_t requests = 0;

    std::shared_ptr<Client> client(const std::string& token) {
        std::lock_guard lock(clients_mutex);
        auto it = clients.find(token);
        recency.remove(token);
        recency.push_front(token);
        if (it != clients.end()) return it->second;
        auto c = std::make_shared<Client>();
        c->session = std::make_unique<DecodeSession>(file, options.threads);
        clients.emplace(token, c);
        while (clients.size() > options.max_sessions) {
            clients.erase(recency.back());
            recency.pop_back();
        }
        return c;
    }

    void cors(httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
        res.set_header("Access-Control-Expose-Headers", "X-Bytes-Loaded, X-Records, X-Decode-Ms, X-Reads");
    }

    void error(httplib::Response& res, int status, const std::string& message) {
        res.status = status;
        res.set_content(nlohmann::json{{"error", message}}.dump(), "application/json");
    }

    void info(httplib::Response& res) {
        const VideoHeader& h = file->header();
        nlohmann::json j{{"frame_count", h.frame_count},   {"width", h.width},
                         {"height", h.height},             {"channels", h.channels},
                         {"fps", h.fps},                   {"levels", h.levels},
                         {"inter_size", h.inter_size()},   {"block_size", h.block_size()},
                         {"mask_width", h.mask_width},     {"mask_height", h.mask_height},
                         {"stereo", h.stereo()},           {"set_count", h.set_count()},
                         {"file_bytes", file->file_size()}};
        res.set_content(j.dump(), "application/json");
    }

    void frame(const httplib::Request& req, httplib::Response& res) {
        const VideoHeader& h = file->header();
        const std::string index_text = req.matches[1];
        std::uint64_t index = 0;
        const auto [end, ec] = std::from_chars(index_text.data(), index_text.data() + index_text.size(), index);
        if (index_text.empty() || ec != std::errc() || end != index_text.data() + index_text.size())
            throw BadRequest("frame index must be a non-negative integer");
        if (index >= h.frame_count) {
            error(res, 404, "frame " + index_text + " out of range (" + std::to_string(h.frame_count) + " frames)");
            return;
        }
        CameraPose pose{number_param(req, "yaw", 0),    number_param(req, "pitch", 0),
                        number_param(req, "roll", 0),   number_param(req, "fov_h", 90),
                        number_param(req, "fov_v", 90)};
        const std::uint32_t w = count_param(req, "w", 512, kMaxOutput);
        const std::uint32_t ht = count_param(req, "h", 512, kMaxOutput);
        if (w == 0 || ht == 0) throw BadRequest("output dimensions must be positive");
        const std::uint32_t foveate = count_param(req, "foveate", 0, 1);
        const std::uint32_t eye = count_param(req, "eye", 0, h.stereo() ? 1 : 0);
        FoveationSchedule schedule =
            FoveationSchedule::standard(h.levels, number_param(req, "gaze_u", 0.5), number_param(req, "gaze_v", 0.5));
        try {
            pose.validate();
            schedule.validate(h.levels);
        } catch (const RangeError& e) {
            throw BadRequest(e.what());
        }
        const ViewportMask mask = viewport_to_mask(pose, h.mask_width, h.mask_height, h.stereo());

        auto run = [&](DecodeSession& s) {
            return foveate ? s.decode_foveated(std::uint32_t(index), mask, schedule)
                           : s.decode_viewport(std::uint32_t(index), mask);
        };
        DecodeResult result;
        const std::string token = req.has_param("session") ? req.get_param_value("session") : "";
        if (token.empty()) {
            DecodeSession cold(file, options.threads);
            result = run(cold);
        } else {
            auto c = client(token);
            std::lock_guard lock(c->mutex);
            result = run(*c->session);
            c->session->advance(mask, foveate ? std::optional(schedule) : std::nullopt);
        }
        const Frame view = render_perspective({result.pixels, result.computed}, pose, w, ht, h.stereo(), int(eye));
        {
            std::lock_guard lock(stats_mutex);
            totals += result.stats;
            ++requests;
        }
        res.set_header("X-Bytes-Loaded", std::to_string(result.stats.bytes_loaded));
        res.set_header("X-Records", std::to_string(result.stats.records));
        res.set_header("X-Decode-Ms", format_ms(result.stats.total_ms));
        res.set_header("X-Reads", std::to_string(result.stats.reads));
        const auto bmp = encode_bmp(view);
        res.set_content(std::string(bmp.begin(), bmp.end()), "image/bmp");
    }

    void stats(const httplib::Request& req, httplib::Response& res) {
        auto dump = [](const DecodeStats& s) {
            return nlohmann::json{{"bytes_loaded", s.bytes_loaded}, {"records", s.records},
                                  {"reads", s.reads},               {"load_ms", s.load_ms},
                                  {"temporal_ms", s.temporal_ms},   {"synthesis_ms", s.synthesis_ms},
                                  {"total_ms", s.total_ms}};
        };
        nlohmann::json j;
        if (req.has_param("session")) {
            std::shared_ptr<Client> c;
            {
                std::lock_guard lock(clients_mutex);
                auto it = clients.find(req.get_param_value("session"));
                if (it == clients.end()) {
                    error(res, 404, "unknown session");
                    return;
                }
                c = it->second;
            }
            std::lock_guard lock(c->mutex);
            j = dump(c->session->totals());
        } else {
            std::lock_guard lock(stats_mutex);
            j = dump(totals);
            j["requests"] = requests;
            std::lock_guard clock(clients_mutex);
            j["sessions"] = clients.size();
        }
        res.set_content(j.dump(), "application/json");
    }

    template <typename Fn>
    httplib::Server::Handler guarded(Fn fn) {
        return [this, fn](const httplib::Request& req, httplib::Response& res) {
            cors(res);
            try {
                fn(req, res);
            } catch (const BadRequest& e) {
                error(res, 400, e.what());
            } catch (const RangeError& e) {
                error(res, 400, e.what());
            } catch (const DataError& e) {
                error(res, 500, std::string("corrupt stream: ") + e.what());
            } catch (const std::exception& e) {
                error(res, 500, e.what());
            }
        };
    }

    void routes() {
        server.Get("/info", guarded([this](const httplib::Request&, httplib::Response& res) { info(res); }));
        server.Get(R"(/frame/([^/]*))",
                   guarded([this](const httplib::Request& req, httplib::Response& res) { frame(req, res); }));
        server.Get("/stats", guarded([this](const httplib::Request& req, httplib::Response& res) { stats(req, res); }));
        server.Options(R"(.*)", [this](const httplib::Request&, httplib::Response& res) {
            cors(res);
            res.set_header("Access-Control-Allow-Headers", "*");
            res.status = 204;
        });
    }
};

StreamService::StreamService(const std::filesystem::path& video, ServiceOptions options)
    : impl_(std::make_unique<Impl>()) {
    impl_->file = std::make_shared<const VideoFile>(video);
    impl_->options = std::move(options);
    impl_->routes();
}

StreamService::~StreamService() { stop(); }

int StreamService::bind() {
    if (impl_->bound_port >= 0) return impl_->bound_port;
    const int port = impl_->options.port == 0
                         ? impl_->server.bind_to_any_port(impl_->options.host)
                         : (impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port
                                                                                                  : -1);
    if (port < 0)
        throw Error("cannot bind " + impl_->options.host + ":" + std::to_string(impl_->options.port));
    impl_->bound_port = port;
    return port;
}

void StreamService::listen() {
    bind();
    impl_->server.listen_after_bind();
}

void StreamService::start() {
    bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void StreamService::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

int StreamService::port() const { return impl_->bound_port; }

}  // namespace wavevid

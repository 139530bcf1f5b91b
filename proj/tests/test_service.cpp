// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#include <cstring>
#include <fstream>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "support.hpp"
#include "wavevid/bitstream.hpp"
#include "wavevid/decoder.hpp"
#include "wavevid/encoder.hpp"
#include "wavevid/image_io.hpp"
#include "wavevid/projection.hpp"
#include "wavevid/quality.hpp"
#include "wavevid/service.hpp"

using namespace wavevid;
using nlohmann::json;

namespace {

struct Server {
    test::TempDir dir;
    std::filesystem::path path;
    std::unique_ptr<StreamService> service;
    std::unique_ptr<httplib::Client> http;

    explicit Server(std::uint32_t frames = 8) {
        EncodeParams p;
        p.levels = 4;
        p.block_size = 16;
        path = dir / "clip.wvv";
        write_video(encode_video(synthetic_clip(256, 128, frames, 17, ClipStyle::Detailed), p), path);
        launch();
    }
    Server(const std::filesystem::path& file, bool) { launch(file); }

    void launch(std::filesystem::path file = {}) {
        if (!file.empty()) path = file;
        ServiceOptions o;
        o.port = 0;
        o.max_sessions = 2;
        service = std::make_unique<StreamService>(path, o);
        service->start();
        http = std::make_unique<httplib::Client>("127.0.0.1", service->port());
    }
    ~Server() { service->stop(); }

    httplib::Result get(const std::string& url) { return http->Get(url); }
};

std::uint64_t header_u64(const httplib::Result& r, const char* name) {
    return std::stoull(r->get_header_value(name));
}

}  // namespace

TEST_CASE("info describes the open video") {
    Server s;
    const VideoFile file(s.path);
    const auto r = s.get("/info");
    REQUIRE(r);
    CHECK(r->status == 200);
    const json j = json::parse(r->body);
    const VideoHeader& h = file.header();
    CHECK(j["frame_count"] == h.frame_count);
    CHECK(j["width"] == 256);
    CHECK(j["height"] == 128);
    CHECK(j["channels"] == 3);
    CHECK(j["levels"] == 4);
    CHECK(j["inter_size"] == 4);
    CHECK(j["block_size"] == 16);
    CHECK(j["mask_width"] == h.mask_width);
    CHECK(j["mask_height"] == h.mask_height);
    CHECK(j["stereo"] == false);
    CHECK(j["set_count"] == 2);
    CHECK(j["file_bytes"] == std::filesystem::file_size(s.path));
    CHECK(s.get("/info")->body == r->body);
}

TEST_CASE("frame responses match a local decode and render") {
    Server s;
    const auto r = s.get("/frame/5?yaw=40&pitch=10&fov_h=80&fov_v=60&w=96&h=64");
    REQUIRE(r);
    REQUIRE(r->status == 200);
    CHECK(r->get_header_value("Content-Type") == "image/bmp");

    auto file = std::make_shared<const VideoFile>(s.path);
    const VideoHeader& h = file->header();
    const CameraPose pose{40, 10, 0, 80, 60};
    DecodeSession session(file);
    const DecodeResult d = session.decode_viewport(5, viewport_to_mask(pose, h.mask_width, h.mask_height));
    const auto bmp = encode_bmp(render_perspective({d.pixels, d.computed}, pose, 96, 64));
    CHECK(r->body == std::string(bmp.begin(), bmp.end()));
    CHECK(header_u64(r, "X-Bytes-Loaded") == d.stats.bytes_loaded);
    CHECK(header_u64(r, "X-Records") == d.stats.records);
    CHECK(header_u64(r, "X-Reads") == d.stats.reads);
    CHECK(std::stod(r->get_header_value("X-Decode-Ms")) >= 0);

    const auto again = s.get("/frame/5?yaw=40&pitch=10&fov_h=80&fov_v=60&w=96&h=64");
    CHECK(again->body == r->body);
    CHECK(header_u64(again, "X-Bytes-Loaded") == d.stats.bytes_loaded);
}

TEST_CASE("foveated frames load fewer bytes") {
    Server s;
    const auto plain = s.get("/frame/2?yaw=-30&w=64&h=64");
    const auto fov = s.get("/frame/2?yaw=-30&w=64&h=64&foveate=1&gaze_u=0.4&gaze_v=0.6");
    REQUIRE(plain->status == 200);
    REQUIRE(fov->status == 200);
    CHECK(header_u64(fov, "X-Bytes-Loaded") < header_u64(plain, "X-Bytes-Loaded"));
    CHECK(header_u64(fov, "X-Records") < header_u64(plain, "X-Records"));
}

TEST_CASE("frame request validation") {
    Server s;
    CHECK(s.get("/frame/8")->status == 404);
    CHECK(s.get("/frame/99999999999")->status == 404);
    for (const char* url : {"/frame/abc", "/frame/-1", "/frame/1x", "/frame/", "/frame/0?yaw=east",
                            "/frame/0?pitch=120", "/frame/0?fov_h=0", "/frame/0?fov_v=200", "/frame/0?w=0",
                            "/frame/0?h=5000", "/frame/0?foveate=2", "/frame/0?eye=1", "/frame/0?gaze_u=1.5",
                            "/frame/0?yaw=1e999"}) {
        CAPTURE(url);
        const auto r = s.get(url);
        REQUIRE(r);
        CHECK(r->status == 400);
        CHECK(json::parse(r->body).contains("error"));
    }
    CHECK(s.get("/nothing")->status == 404);
}

TEST_CASE("cross-origin headers") {
    Server s;
    const auto r = s.get("/frame/0?w=16&h=16");
    CHECK(r->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(r->get_header_value("Access-Control-Expose-Headers").find("X-Bytes-Loaded") != std::string::npos);
    CHECK(s.get("/info")->get_header_value("Access-Control-Allow-Origin") == "*");
    const auto pre = s.http->Options("/frame/0");
    REQUIRE(pre);
    CHECK(pre->status == 204);
    CHECK(pre->get_header_value("Access-Control-Allow-Methods").find("GET") != std::string::npos);
}

TEST_CASE("session tokens reuse prefetched data") {
    Server s;
    // Same view across a set: later frames come from the resident set.
    const auto first = s.get("/frame/0?yaw=10&w=32&h=32&session=a");
    REQUIRE(first->status == 200);
    CHECK(header_u64(first, "X-Bytes-Loaded") > 0);
    for (int t = 1; t < 4; ++t) {
        const auto r = s.get("/frame/" + std::to_string(t) + "?yaw=10&w=32&h=32&session=a");
        REQUIRE(r->status == 200);
        CHECK(header_u64(r, "X-Bytes-Loaded") == 0);
        CHECK(r->body == s.get("/frame/" + std::to_string(t) + "?yaw=10&w=32&h=32")->body);
    }

    const json mine = json::parse(s.get("/stats?session=a")->body);
    CHECK(mine["bytes_loaded"].get<std::uint64_t>() >= header_u64(first, "X-Bytes-Loaded"));
    CHECK(s.get("/stats?session=nobody")->status == 404);

    const json all = json::parse(s.get("/stats")->body);
    CHECK(all["requests"] == 7);
    CHECK(all["sessions"] == 1);

    // Sessions beyond the limit evict the least recently used one.
    s.get("/frame/0?w=8&h=8&session=b");
    s.get("/frame/0?w=8&h=8&session=c");
    CHECK(json::parse(s.get("/stats")->body)["sessions"] == 2);
    CHECK(s.get("/stats?session=a")->status == 404);
    CHECK(s.get("/stats?session=c")->status == 200);
}

TEST_CASE("corrupt streams report a server error") {
    test::TempDir dir;
    EncodeParams p;
    p.levels = 2;
    p.block_size = 16;
    const EncodedVideo v = encode_video(synthetic_clip(64, 64, 4, 2), p);
    const auto good = dir / "good.wvv";
    write_video(v, good);
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    // The first block end of set 0 points far past the file.
    const std::uint64_t table = 64 + v.header.meta_entry_bytes();
    const std::uint64_t huge = 1ull << 40;
    std::memcpy(bytes.data() + table, &huge, sizeof huge);
    const auto bad = dir / "bad.wvv";
    std::ofstream(bad, std::ios::binary) << bytes;

    Server s(bad, true);
    CHECK(s.get("/info")->status == 200);
    const auto r = s.get("/frame/0?fov_h=360&fov_v=180&w=16&h=16");
    REQUIRE(r);
    CHECK(r->status == 500);
    CHECK(json::parse(r->body)["error"].get<std::string>().find("corrupt") != std::string::npos);
}

TEST_CASE("service construction errors") {
    CHECK_THROWS(StreamService("/nonexistent/clip.wvv"));
}

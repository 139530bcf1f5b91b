// Copyright 2026 The wavevid Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>

namespace wavevid {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    unsigned threads = 0;
    std::size_t max_sessions = 64;
};

// HTTP front end over one open video:
//   GET /info                      header summary (JSON)
//   GET /frame/{t}?yaw&pitch&roll&fov_h&fov_v&w&h&foveate&gaze_u&gaze_v&eye&session
//                                  rendered view as BMP, with X-Bytes-Loaded,
//                                  X-Records and X-Decode-Ms headers
//   GET /stats[?session=token]     decode counters (JSON)
// Requests carrying a session token reuse that client's decode session and
// its prefetch; anonymous requests decode from a cold session.
class StreamService {
public:
    StreamService(const std::filesystem::path& video, ServiceOptions options = {});
    ~StreamService();
    StreamService(const StreamService&) = delete;
    StreamService& operator=(const StreamService&) = delete;

    // Binds the socket and returns the bound port.
    int bind();
    // Serves until stop(). Binds first if needed.
    void listen();
    // listen() on a background thread; returns once the port is bound.
    void start();
    void stop();
    int port() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace wavevid

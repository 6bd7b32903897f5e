#pragma once

#include <cerrno>
#include <csignal>
#include <cstdint>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "contourkit/errors.hpp"
#include "contourkit/png_io.hpp"
#include "contourkit/segmenter.hpp"

namespace contourkit {

class WireError : public Error {
public:
    using Error::Error;
};
class WireTimeout : public WireError {
public:
    using WireError::WireError;
};
class WireMalformedResponse : public WireError {
public:
    using WireError::WireError;
};
class WireDimensionMismatch : public WireError {
public:
    using WireError::WireError;
};
class WireChildExit : public WireError {
public:
    using WireError::WireError;
};

namespace wire {

inline std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    std::size_t i = 0;
    for (; i + 3 <= len; i += 3) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8) | data[i + 2];
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
    }
    if (i + 1 == len) {
        const std::uint32_t v = data[i] << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == len) {
        const std::uint32_t v = (data[i] << 16) | (data[i + 1] << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

inline std::string base64_encode(const std::vector<std::uint8_t>& data) {
    return base64_encode(data.data(), data.size());
}

inline std::vector<std::uint8_t> base64_decode(const std::string& text) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::vector<std::uint8_t> out;
    out.reserve(text.size() / 4 * 3);
    std::uint32_t acc = 0;
    int bits = 0;
    for (char c : text) {
        if (c == '=') break;
        const int v = value_of(c);
        if (v < 0) throw WireMalformedResponse("invalid base64 character");
        acc = (acc << 6) | static_cast<std::uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
        }
    }
    return out;
}

/// One protocol request, either contour-style (three channel PNGs) or
/// click-style (click coordinates plus the previous-mask PNG).
struct WireRequest {
    std::int64_t id = 0;
    int width = 0;
    int height = 0;
    std::string image_path;
    std::optional<BinaryMask> pos;
    std::optional<BinaryMask> neg;
    std::optional<ProbabilityMask> prev;
    std::vector<Click> clicks;
    bool is_click_request = false;
};

inline std::string encode_contour_request(std::int64_t id, const SegmenterQuery& query) {
    nlohmann::json j;
    j["id"] = id;
    j["width"] = query.encoding.positive.width();
    j["height"] = query.encoding.positive.height();
    j["image_path"] = query.image_ref;
    j["channels"] = {
        {"pos", base64_encode(pngio::encode_mask(query.encoding.positive))},
        {"neg", base64_encode(pngio::encode_mask(query.encoding.negative))},
        {"prev", base64_encode(pngio::encode_probability(query.encoding.previous))},
    };
    return j.dump();
}

inline std::string encode_click_request(std::int64_t id, const ClickQuery& query) {
    nlohmann::json j;
    j["id"] = id;
    j["width"] = query.width;
    j["height"] = query.height;
    j["image_path"] = query.image_ref;
    nlohmann::json clicks = nlohmann::json::array();
    for (const Click& c : query.clicks) {
        clicks.push_back({{"x", c.x},
                          {"y", c.y},
                          {"polarity",
                           c.polarity == ClickPolarity::positive ? "positive" : "negative"}});
    }
    j["clicks"] = std::move(clicks);
    j["channels"] = {{"prev", base64_encode(pngio::encode_probability(query.previous))}};
    return j.dump();
}

/// Parses a request line (the child side of the protocol; also exercised by
/// round-trip tests).
inline WireRequest decode_request(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        throw WireMalformedResponse(std::string("request is not valid JSON: ") + e.what());
    }
    try {
        WireRequest req;
        req.id = j.at("id").get<std::int64_t>();
        req.width = j.at("width").get<int>();
        req.height = j.at("height").get<int>();
        req.image_path = j.at("image_path").get<std::string>();
        const auto& channels = j.at("channels");
        if (channels.contains("prev")) {
            const auto bytes = base64_decode(channels["prev"].get<std::string>());
            req.prev = pngio::decode_probability(bytes.data(), bytes.size());
        }
        if (j.contains("clicks")) {
            req.is_click_request = true;
            for (const auto& c : j["clicks"]) {
                req.clicks.push_back({c.at("x").get<int>(), c.at("y").get<int>(),
                                      c.at("polarity").get<std::string>() == "negative"
                                          ? ClickPolarity::negative
                                          : ClickPolarity::positive});
            }
        } else {
            const auto pos_bytes = base64_decode(channels.at("pos").get<std::string>());
            const auto neg_bytes = base64_decode(channels.at("neg").get<std::string>());
            req.pos = pngio::decode_mask(pos_bytes.data(), pos_bytes.size());
            req.neg = pngio::decode_mask(neg_bytes.data(), neg_bytes.size());
        }
        return req;
    } catch (const WireError&) {
        throw;
    } catch (const std::exception& e) {
        throw WireMalformedResponse(std::string("request missing fields: ") + e.what());
    }
}

inline std::string encode_response(std::int64_t id, const ProbabilityMask& mask) {
    nlohmann::json j;
    j["id"] = id;
    j["mask"] = base64_encode(pngio::encode_probability(mask));
    return j.dump();
}

/// Decodes and validates a response line against the expected id and query
/// dimensions.
inline ProbabilityMask decode_response(const std::string& line, std::int64_t expected_id,
                                       int expected_width, int expected_height) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        throw WireMalformedResponse(std::string("response is not valid JSON: ") + e.what());
    }
    if (j.contains("error")) {
        throw WireMalformedResponse("child reported error: " +
                                    j["error"].get<std::string>());
    }
    if (!j.contains("id") || !j.contains("mask")) {
        throw WireMalformedResponse("response missing id/mask fields");
    }
    if (j["id"].get<std::int64_t>() != expected_id) {
        throw WireMalformedResponse("response id does not match the request");
    }
    ProbabilityMask mask(1, 1);
    try {
        const auto bytes = base64_decode(j["mask"].get<std::string>());
        mask = pngio::decode_probability(bytes.data(), bytes.size());
    } catch (const WireError&) {
        throw;
    } catch (const std::exception& e) {
        throw WireMalformedResponse(std::string("undecodable response mask: ") + e.what());
    }
    if (mask.width() != expected_width || mask.height() != expected_height) {
        throw WireDimensionMismatch("response mask dimensions do not match the query");
    }
    return mask;
}

/// A line-oriented child process over stdin/stdout pipes. One in-flight
/// request at a time; parallelism comes from a pool of processes.
class ChildProcess {
public:
    explicit ChildProcess(const std::string& command) {
        std::signal(SIGPIPE, SIG_IGN);
        int to_child[2];
        int from_child[2];
        if (pipe(to_child) != 0 || pipe(from_child) != 0) {
            throw WireError("failed to create pipes");
        }
        pid_ = fork();
        if (pid_ < 0) throw WireError("fork failed");
        if (pid_ == 0) {
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            close(to_child[0]);
            close(to_child[1]);
            close(from_child[0]);
            close(from_child[1]);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        in_fd_ = to_child[1];
        out_fd_ = from_child[0];
    }

    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;

    ~ChildProcess() {
        if (in_fd_ >= 0) close(in_fd_);
        if (out_fd_ >= 0) close(out_fd_);
        if (pid_ > 0) {
            kill(pid_, SIGKILL);
            int status = 0;
            waitpid(pid_, &status, 0);
        }
    }

    void write_line(const std::string& line) {
        std::string payload = line;
        payload += '\n';
        std::size_t off = 0;
        while (off < payload.size()) {
            const ssize_t n = ::write(in_fd_, payload.data() + off, payload.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw_child_exit("write to child failed");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line(int timeout_ms) {
        for (;;) {
            const std::size_t nl = buffer_.find('\n');
            if (nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            pollfd pfd{out_fd_, POLLIN, 0};
            const int pr = poll(&pfd, 1, timeout_ms);
            if (pr == 0) throw WireTimeout("child response timed out");
            if (pr < 0) {
                if (errno == EINTR) continue;
                throw WireError("poll failed");
            }
            char chunk[4096];
            const ssize_t n = ::read(out_fd_, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                throw_child_exit("read from child failed");
            }
            if (n == 0) throw_child_exit("child closed its output");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    [[noreturn]] void throw_child_exit(const std::string& what) {
        int status = 0;
        std::string detail = what;
        if (pid_ > 0 && waitpid(pid_, &status, WNOHANG) == pid_) {
            pid_ = -1;
            if (WIFEXITED(status)) {
                detail += " (exit code " + std::to_string(WEXITSTATUS(status)) + ")";
            } else if (WIFSIGNALED(status)) {
                detail += " (killed by signal " + std::to_string(WTERMSIG(status)) + ")";
            }
        }
        throw WireChildExit(detail);
    }

    pid_t pid_ = -1;
    int in_fd_ = -1;
    int out_fd_ = -1;
    std::string buffer_;
};

struct ExternalConfig {
    std::string command;
    int timeout_ms = 30000;
};

/// Request/response client over one child. A failed exchange poisons the
/// child; the next request spawns a fresh one.
class ProcessClient {
public:
    explicit ProcessClient(ExternalConfig config) : config_(std::move(config)) {}

    ProbabilityMask exchange(const std::string& request_line, std::int64_t id, int width,
                             int height) {
        if (!child_) child_ = std::make_unique<ChildProcess>(config_.command);
        try {
            child_->write_line(request_line);
            const std::string line = child_->read_line(config_.timeout_ms);
            return decode_response(line, id, width, height);
        } catch (...) {
            child_.reset();
            throw;
        }
    }

    std::int64_t next_id() { return next_id_++; }

private:
    ExternalConfig config_;
    std::unique_ptr<ChildProcess> child_;
    std::int64_t next_id_ = 1;
};

} // namespace wire

/// Contour-protocol client for an external model process.
class ExternalContourSegmenter : public ContourSegmenter {
public:
    explicit ExternalContourSegmenter(wire::ExternalConfig config)
        : client_(std::move(config)) {}

    SegmenterAnswer predict(const SegmenterQuery& query) override {
        const std::int64_t id = client_.next_id();
        const std::string request = wire::encode_contour_request(id, query);
        return {client_.exchange(request, id, query.encoding.positive.width(),
                                 query.encoding.positive.height())};
    }

    std::string name() const override { return "external"; }

private:
    wire::ProcessClient client_;
};

class ExternalClickSegmenter : public ClickSegmenter {
public:
    explicit ExternalClickSegmenter(wire::ExternalConfig config) : client_(std::move(config)) {}

    SegmenterAnswer predict(const ClickQuery& query) override {
        const std::int64_t id = client_.next_id();
        const std::string request = wire::encode_click_request(id, query);
        return {client_.exchange(request, id, query.width, query.height)};
    }

    std::string name() const override { return "external"; }

private:
    wire::ProcessClient client_;
};

} // namespace contourkit

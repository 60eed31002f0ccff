#include "bevkit/external_segmenter.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <limits>
#include <thread>

#include <json.hpp>

namespace bevkit {
namespace {

constexpr std::int64_t kHandshake = std::numeric_limits<std::int64_t>::min();

std::string frame_tag(std::int64_t frame_id) {
    return frame_id == kHandshake ? std::string("handshake") : "frame " + std::to_string(frame_id);
}

}  // namespace

ExternalSegmenter::ExternalSegmenter(const std::string& command,
                                     std::chrono::milliseconds timeout)
    : timeout_(timeout) {
    int fds[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) {
        throw Error(ErrorCode::ProcessExit, std::string("socketpair: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) {
        ::close(fds[0]);
        ::close(fds[1]);
        throw Error(ErrorCode::ProcessExit, std::string("fork: ") + std::strerror(errno));
    }
    if (pid_ == 0) {
        ::setpgid(0, 0);
        ::dup2(fds[1], STDIN_FILENO);
        ::dup2(fds[1], STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    ::setpgid(pid_, pid_);
    ::close(fds[1]);
    fd_ = fds[0];

    try {
        send_line(R"({"type":"hello","version":1})", kHandshake);
        const auto reply = nlohmann::json::parse(read_line(kHandshake), nullptr, false);
        if (reply.is_discarded() || !reply.is_object() || reply.value("type", "") != "ready" ||
            !reply.contains("name") || !reply["name"].is_string()) {
            throw Error(ErrorCode::ProtocolError, "handshake: expected ready message");
        }
        adapter_name_ = reply["name"].get<std::string>();
    } catch (...) {
        shutdown_child();
        throw;
    }
}

ExternalSegmenter::~ExternalSegmenter() { shutdown_child(); }

void ExternalSegmenter::shutdown_child() noexcept {
    if (fd_ >= 0) {
        ::shutdown(fd_, SHUT_WR);
        ::close(fd_);
        fd_ = -1;
    }
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (::waitpid(pid_, &status, WNOHANG) == pid_) {
                pid_ = -1;
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        ::kill(-pid_, SIGKILL);
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
    }
}

void ExternalSegmenter::fail_exited(std::int64_t frame_id) {
    throw Error(ErrorCode::ProcessExit, "segmenter process exited (" + frame_tag(frame_id) + ")");
}

void ExternalSegmenter::send_line(const std::string& line, std::int64_t frame_id) {
    std::string data = line + "\n";
    std::size_t sent = 0;
    while (sent < data.size()) {
        const auto n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            fail_exited(frame_id);
        }
        sent += static_cast<std::size_t>(n);
    }
}

std::string ExternalSegmenter::read_line(std::int64_t frame_id) {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
        if (const auto pos = buffer_.find('\n'); pos != std::string::npos) {
            std::string line = buffer_.substr(0, pos);
            buffer_.erase(0, pos + 1);
            return line;
        }
        const auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
            deadline - std::chrono::steady_clock::now());
        if (remaining.count() <= 0) {
            throw Error(ErrorCode::Timeout, "no reply from segmenter (" + frame_tag(frame_id) + ")");
        }
        pollfd pfd{fd_, POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(remaining.count()));
        if (ready < 0 && errno == EINTR) continue;
        if (ready == 0) continue;
        char chunk[65536];
        const auto n = ::recv(fd_, chunk, sizeof(chunk), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) fail_exited(frame_id);
        buffer_.append(chunk, static_cast<std::size_t>(n));
    }
}

std::vector<Detection> ExternalSegmenter::segment(const BinaryGrid& fg, std::int64_t frame_id) {
    nlohmann::json request{{"type", "segment"},
                           {"frame_id", frame_id},
                           {"width", fg.width()},
                           {"height", fg.height()},
                           {"mask_rle", encode_rle(fg)}};
    send_line(request.dump(), frame_id);

    const std::string line = read_line(frame_id);
    const auto bad = [&](const std::string& why) {
        return Error(ErrorCode::ProtocolError, frame_tag(frame_id) + ": " + why);
    };
    const auto reply = nlohmann::json::parse(line, nullptr, false);
    if (reply.is_discarded() || !reply.is_object()) throw bad("malformed JSON reply");
    const std::string type = reply.value("type", "");
    if (type == "error") throw bad("adapter error: " + reply.value("message", std::string{}));
    if (type != "segments") throw bad("unexpected message type '" + type + "'");
    if (!reply.contains("frame_id") || !reply["frame_id"].is_number_integer() ||
        reply["frame_id"].get<std::int64_t>() != frame_id) {
        throw bad("frame_id mismatch");
    }
    if (!reply.contains("segments") || !reply["segments"].is_array()) throw bad("missing segments");

    std::vector<Detection> out;
    for (const auto& seg : reply["segments"]) {
        if (!seg.is_object() || !seg.contains("score") || !seg["score"].is_number() ||
            !seg.contains("mask_rle") || !seg["mask_rle"].is_array()) {
            throw bad("malformed segment");
        }
        std::vector<std::int64_t> rle;
        for (const auto& run : seg["mask_rle"]) {
            if (!run.is_number_integer()) throw bad("non-integer RLE run");
            rle.push_back(run.get<std::int64_t>());
        }
        BinaryGrid grid;
        try {
            grid = decode_rle(rle, fg.width(), fg.height());
        } catch (const Error& e) {
            throw bad(e.what());
        }
        auto mask = PixelMask::from_grid(grid);
        if (mask.empty()) continue;
        out.push_back(make_detection(std::move(mask), seg["score"].get<double>(), frame_id));
    }
    return out;
}

}  // namespace bevkit

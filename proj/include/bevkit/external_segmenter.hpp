#pragma once

#include <chrono>
#include <string>
#include <sys/types.h>

#include "bevkit/segment.hpp"

namespace bevkit {

/// Segmenter living in a child process, spoken to with line-delimited JSON
/// over its stdin/stdout:
///
///   -> {"type":"hello","version":1}            <- {"type":"ready","name":...}
///   -> {"type":"segment","frame_id":..,"width":..,"height":..,"mask_rle":[..]}
///   <- {"type":"segments","frame_id":..,"segments":[{"score":..,"mask_rle":[..]},..]}
///
/// One request is in flight at a time; the object is not thread-safe.
class ExternalSegmenter final : public Segmenter {
public:
    /// Spawns `command` via /bin/sh and performs the handshake.
    explicit ExternalSegmenter(const std::string& command,
                               std::chrono::milliseconds timeout = std::chrono::seconds(30));
    ~ExternalSegmenter() override;

    ExternalSegmenter(const ExternalSegmenter&) = delete;
    ExternalSegmenter& operator=(const ExternalSegmenter&) = delete;

    std::vector<Detection> segment(const BinaryGrid& fg, std::int64_t frame_id) override;
    [[nodiscard]] std::string name() const override { return adapter_name_; }

private:
    void send_line(const std::string& line, std::int64_t frame_id);
    std::string read_line(std::int64_t frame_id);
    void shutdown_child() noexcept;
    [[noreturn]] void fail_exited(std::int64_t frame_id);

    pid_t pid_ = -1;
    int fd_ = -1;
    std::chrono::milliseconds timeout_;
    std::string buffer_;
    std::string adapter_name_;
};

}  // namespace bevkit

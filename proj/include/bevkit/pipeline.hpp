#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "bevkit/config.hpp"
#include "bevkit/error.hpp"
#include "bevkit/segment.hpp"

namespace bevkit {

/// A stage failed; carries the stage name and, when known, the frame.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, std::optional<std::int64_t> frame_id, ErrorCode code, const std::string& msg);

    [[nodiscard]] const std::string& stage() const noexcept { return stage_; }
    [[nodiscard]] std::optional<std::int64_t> frame_id() const noexcept { return frame_id_; }
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    std::string stage_;
    std::optional<std::int64_t> frame_id_;
    ErrorCode code_;
};

std::unique_ptr<Segmenter> make_segmenter(const PipelineConfig& cfg);

// Each stage reads the input sequence and/or earlier artifacts under cfg.out
// and writes its own artifacts there, so any stage can be rerun alone.
void stage_rasterize(const PipelineConfig& cfg);   // bev/frame_*.pgm, sequence.json
void stage_background(const PipelineConfig& cfg);  // background*.pgm, completed_background.pgm
void stage_detect(const PipelineConfig& cfg);      // foreground/frame_*.pgm, detections.jsonl
void stage_track(const PipelineConfig& cfg);       // tracks.jsonl, track_filter.json
void stage_ground(const PipelineConfig& cfg);      // ground_map.csv/.json/.pgm (needs detections)
void stage_boxes(const PipelineConfig& cfg);       // boxes.jsonl, tracks.jsonl with classes
void stage_params(const PipelineConfig& cfg);      // params.csv, stats.json, counts.json, track_summary.json
void stage_eval(const PipelineConfig& cfg);        // eval_report.json/.txt (needs eval.gt)
void stage_plot(const PipelineConfig& cfg);        // plots/*.svg

/// All stages in order, plus config.effective.json. Eval runs only when
/// cfg.eval_gt is set.
void run_pipeline(const PipelineConfig& cfg);

}  // namespace bevkit

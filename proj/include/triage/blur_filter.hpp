#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "triage/imaging.hpp"

namespace triage::blur {

inline constexpr int kDefaultWindow = 20;

/// One extracted video frame. Carries either a raster, a precomputed score, or both.
struct FrameRecord {
  int index = 0;
  double timestamp = 0.0;  // seconds from the start of the video
  std::string filename;
  std::optional<imaging::GrayImage> image;
  std::optional<double> blur_score;  // variance of the Laplacian
};

/// Per-frame sharpness scores and the dynamic thresholds derived from them.
///
/// thresholds[n] is the mean of the variances whose index lies in
/// [n - k, n + k] and inside the sequence. j_counts[n] records how many
/// window positions fell outside the sequence, so the divisor is
/// (2k + 1) - j_counts[n].
struct BlurSeries {
  std::vector<double> variances;
  int k = kDefaultWindow;
  std::vector<double> thresholds;
  std::vector<int> j_counts;

  bool computed() const noexcept {
    return !variances.empty() && thresholds.size() == variances.size() &&
           j_counts.size() == variances.size();
  }
};

struct FilterVerdict {
  int frame_index = 0;
  double variance = 0.0;
  double threshold = 0.0;
  bool keep = true;

  friend bool operator==(const FilterVerdict&, const FilterVerdict&) = default;
};

/// Fills thresholds and j_counts. Throws EmptySeries or InvalidSeries.
BlurSeries compute_thresholds(BlurSeries series);

/// keep <=> variance >= threshold. Throws NotComputed when thresholds are absent.
std::vector<FilterVerdict> classify(const BlurSeries& series);

struct FilterReport {
  int k = kDefaultWindow;
  std::vector<FilterVerdict> verdicts;
  std::size_t kept_count = 0;
  std::size_t discarded_count = 0;
};

struct FilterResult {
  std::vector<FrameRecord> kept;
  std::vector<FrameRecord> discarded;
  FilterReport report;
};

/// Scores frames lacking a blur_score, then thresholds and partitions them.
FilterResult filter_frames(std::span<const FrameRecord> frames, int k = kDefaultWindow);

/// Online form of compute_thresholds + classify holding at most 2k + 1
/// variances. Verdicts are emitted in frame order and are bit-identical to
/// the batch computation.
class ThresholdStream {
 public:
  explicit ThresholdStream(int k = kDefaultWindow);

  /// Appends the next frame's variance; returns verdicts that became final.
  std::vector<FilterVerdict> push(double variance);
  /// Flushes the trailing frames whose windows run past the end.
  std::vector<FilterVerdict> finish();

  int k() const noexcept { return k_; }
  std::size_t buffered() const noexcept { return window_.size(); }

 private:
  FilterVerdict settle(int frame, int last_existing) const;

  int k_;
  int next_index_ = 0;    // index the next pushed variance receives
  int next_verdict_ = 0;  // first frame without a verdict yet
  int window_base_ = 0;   // frame index of window_.front()
  std::deque<double> window_;
  bool finished_ = false;
};

}  // namespace triage::blur

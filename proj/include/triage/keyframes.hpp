#pragma once

#include <istream>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "triage/blur_filter.hpp"
#include "triage/imaging.hpp"

namespace triage::keyframes {

using blur::FrameRecord;

struct KeyframePolicy {
  double similarity_threshold = 8.0;  // mean absolute difference, grey levels
  int min_gap = 5;                    // frames
  int thumb_width = 64;
  int thumb_height = 32;

  /// Throws InvalidPolicy when a field is out of range.
  void validate() const;
};

imaging::GrayImage make_thumbnail(const imaging::GrayImage& frame, const KeyframePolicy& policy);

/// Mean absolute per-pixel difference of two equally sized images.
double mean_absolute_difference(const imaging::GrayImage& a, const imaging::GrayImage& b);

/// Sequential keyframe scan that keeps only the last selected thumbnail.
class KeyframeSelector {
 public:
  explicit KeyframeSelector(KeyframePolicy policy = {});

  /// Offers the next frame in sequence order; returns true when it becomes a keyframe.
  bool offer(int frame_index, const imaging::GrayImage& frame);
  /// Same as offer() for a frame already reduced by make_thumbnail().
  bool offer_thumbnail(int frame_index, imaging::GrayImage thumbnail);

  const KeyframePolicy& policy() const noexcept { return policy_; }
  std::size_t selected_count() const noexcept { return selected_; }

 private:
  KeyframePolicy policy_;
  std::optional<imaging::GrayImage> last_thumbnail_;
  int last_index_ = 0;
  std::size_t selected_ = 0;
};

/// Frame 0 is always kept; a later frame is kept when it is at least
/// min_gap frames after the last keyframe and its thumbnail differs from
/// that keyframe's by more than similarity_threshold.
std::vector<FrameRecord> select_keyframes(std::span<const FrameRecord> frames,
                                          const KeyframePolicy& policy);

/// One non-comment line of an external keyframe listing.
struct ListingEntry {
  std::size_t line = 0;
  std::variant<int, std::string> key;  // frame index or filename
};

/// Parses UTF-8 text with one frame index or filename per line. Blank lines
/// and everything after `#` are ignored.
std::vector<ListingEntry> parse_keyframe_listing(std::istream& in);

struct IngestResult {
  std::vector<FrameRecord> selection;
  std::vector<std::string> warnings;
};

/// Resolves listing entries against frames (by FrameRecord::index or
/// filename). Throws BadListing for unknown entries or non-ascending order.
IngestResult ingest_external_keyframes(std::span<const ListingEntry> listing,
                                       std::span<const FrameRecord> frames);

}  // namespace triage::keyframes

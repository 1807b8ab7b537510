#include "triage/keyframes.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

#include "triage/error.hpp"

namespace triage::keyframes {

void KeyframePolicy::validate() const {
  if (!std::isfinite(similarity_threshold) || similarity_threshold < 0.0 ||
      similarity_threshold > 255.0) {
    throw InvalidPolicy("similarity_threshold must lie in [0, 255]");
  }
  if (min_gap < 1) throw InvalidPolicy("min_gap must be >= 1");
  if (thumb_width < 8 || thumb_height < 4) {
    throw InvalidPolicy("thumbnail must be at least 8x4 pixels");
  }
}

imaging::GrayImage make_thumbnail(const imaging::GrayImage& frame, const KeyframePolicy& policy) {
  return imaging::resample_area(frame, policy.thumb_width, policy.thumb_height);
}

double mean_absolute_difference(const imaging::GrayImage& a, const imaging::GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height() || a.empty()) {
    throw InvalidImage("mean absolute difference needs two equally sized non-empty images");
  }
  const auto sa = a.samples();
  const auto sb = b.samples();
  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
  return total / static_cast<double>(sa.size());
}

KeyframeSelector::KeyframeSelector(KeyframePolicy policy) : policy_(policy) { policy_.validate(); }

bool KeyframeSelector::offer(int frame_index, const imaging::GrayImage& frame) {
  return offer_thumbnail(frame_index, make_thumbnail(frame, policy_));
}

bool KeyframeSelector::offer_thumbnail(int frame_index, imaging::GrayImage thumbnail) {
  if (last_thumbnail_) {
    if (frame_index - last_index_ < policy_.min_gap) return false;
    if (mean_absolute_difference(*last_thumbnail_, thumbnail) <= policy_.similarity_threshold) {
      return false;
    }
  }
  last_thumbnail_ = std::move(thumbnail);
  last_index_ = frame_index;
  ++selected_;
  return true;
}

std::vector<FrameRecord> select_keyframes(std::span<const FrameRecord> frames,
                                          const KeyframePolicy& policy) {
  KeyframeSelector selector(policy);
  std::vector<FrameRecord> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i].image) {
      throw InvalidImage("frame " + std::to_string(frames[i].index) + " carries no raster");
    }
    if (i > 0 && frames[i].index <= frames[i - 1].index) {
      throw InvalidImage("frame indices must be strictly ascending");
    }
    if (selector.offer(frames[i].index, *frames[i].image)) out.push_back(frames[i]);
  }
  return out;
}

std::vector<ListingEntry> parse_keyframe_listing(std::istream& in) {
  std::vector<ListingEntry> entries;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    std::string token = line.substr(first, last - first + 1);

    int index = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), index);
    if (ec == std::errc() && end == token.data() + token.size()) {
      if (index < 0) throw BadListing(number, "negative frame index " + token);
      entries.push_back({number, index});
    } else if (ec == std::errc::result_out_of_range) {
      throw BadListing(number, "frame index out of range: " + token);
    } else {
      entries.push_back({number, std::move(token)});
    }
  }
  return entries;
}

IngestResult ingest_external_keyframes(std::span<const ListingEntry> listing,
                                       std::span<const FrameRecord> frames) {
  IngestResult result;
  if (listing.empty()) {
    result.warnings.push_back("keyframe listing is empty; selection is empty");
    return result;
  }
  std::unordered_map<int, std::size_t> by_index;
  std::unordered_map<std::string, std::size_t> by_name;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    by_index.emplace(frames[i].index, i);
    if (!frames[i].filename.empty()) by_name.emplace(frames[i].filename, i);
  }

  std::optional<int> previous;
  for (const auto& entry : listing) {
    std::size_t position = 0;
    if (const int* index = std::get_if<int>(&entry.key)) {
      auto it = by_index.find(*index);
      if (it == by_index.end()) {
        throw BadListing(entry.line, "frame index " + std::to_string(*index) +
                                         " is out of range for " + std::to_string(frames.size()) +
                                         " frames");
      }
      position = it->second;
    } else {
      const auto& name = std::get<std::string>(entry.key);
      auto it = by_name.find(name);
      if (it == by_name.end()) throw BadListing(entry.line, "unknown frame file " + name);
      position = it->second;
    }
    const int frame_index = frames[position].index;
    if (previous && frame_index <= *previous) {
      throw BadListing(entry.line, "frame indices must be strictly ascending");
    }
    previous = frame_index;
    result.selection.push_back(frames[position]);
  }
  return result;
}

}  // namespace triage::keyframes

#include "triage/blur_filter.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "triage/error.hpp"

namespace triage::blur {

namespace {

void check_window(int k) {
  if (k < 0) throw InvalidSeries("window half-width k must be >= 0, got " + std::to_string(k));
}

void check_variance(double v, std::size_t index) {
  if (!std::isfinite(v) || v < 0.0) {
    throw InvalidSeries("variance at frame " + std::to_string(index) +
                        " must be finite and >= 0");
  }
}

// Mean of values[lo..hi] (inclusive, offsets into `values`), summed in
// ascending order. The batch and streaming paths both go through here so
// their thresholds agree to the last bit.
template <typename Container>
double window_mean(const Container& values, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t i = lo; i <= hi; ++i) sum += values[i];
  return sum / static_cast<double>(hi - lo + 1);
}

}  // namespace

BlurSeries compute_thresholds(BlurSeries series) {
  if (series.variances.empty()) throw EmptySeries("cannot threshold an empty variance series");
  check_window(series.k);
  for (std::size_t i = 0; i < series.variances.size(); ++i) check_variance(series.variances[i], i);

  const long long n_frames = static_cast<long long>(series.variances.size());
  const long long k = series.k;
  series.thresholds.assign(series.variances.size(), 0.0);
  series.j_counts.assign(series.variances.size(), 0);
  for (long long n = 0; n < n_frames; ++n) {
    const long long lo = std::max(0LL, n - k);
    const long long hi = std::min(n_frames - 1, n + k);
    series.thresholds[n] = window_mean(series.variances, lo, hi);
    series.j_counts[n] = static_cast<int>((2 * k + 1) - (hi - lo + 1));
  }
  return series;
}

std::vector<FilterVerdict> classify(const BlurSeries& series) {
  if (!series.computed()) throw NotComputed("thresholds have not been computed for this series");
  std::vector<FilterVerdict> verdicts;
  verdicts.reserve(series.variances.size());
  for (std::size_t i = 0; i < series.variances.size(); ++i) {
    const double v = series.variances[i];
    const double t = series.thresholds[i];
    verdicts.push_back({static_cast<int>(i), v, t, v >= t});
  }
  return verdicts;
}

FilterResult filter_frames(std::span<const FrameRecord> frames, int k) {
  if (frames.empty()) throw EmptySeries("no frames to filter");
  BlurSeries series;
  series.k = k;
  series.variances.reserve(frames.size());
  for (const auto& frame : frames) {
    if (frame.blur_score) {
      series.variances.push_back(*frame.blur_score);
    } else if (frame.image) {
      series.variances.push_back(imaging::variance_of_laplacian(*frame.image));
    } else {
      throw InvalidSeries("frame " + std::to_string(frame.index) +
                          " has neither a raster nor a blur score");
    }
  }
  series = compute_thresholds(std::move(series));

  FilterResult result;
  result.report.k = k;
  result.report.verdicts = classify(series);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    auto& verdict = result.report.verdicts[i];
    verdict.frame_index = frames[i].index;
    FrameRecord record = frames[i];
    record.blur_score = verdict.variance;
    (verdict.keep ? result.kept : result.discarded).push_back(std::move(record));
  }
  result.report.kept_count = result.kept.size();
  result.report.discarded_count = result.discarded.size();
  return result;
}

ThresholdStream::ThresholdStream(int k) : k_(k) { check_window(k); }

FilterVerdict ThresholdStream::settle(int frame, int last_existing) const {
  const int lo = std::max(0, frame - k_);
  const int hi = std::min(last_existing, frame + k_);
  const double threshold = window_mean(window_, static_cast<std::size_t>(lo - window_base_),
                                       static_cast<std::size_t>(hi - window_base_));
  const double v = window_[static_cast<std::size_t>(frame - window_base_)];
  return {frame, v, threshold, v >= threshold};
}

std::vector<FilterVerdict> ThresholdStream::push(double variance) {
  if (finished_) throw InvalidSeries("push after finish");
  check_variance(variance, static_cast<std::size_t>(next_index_));
  window_.push_back(variance);
  const int newest = next_index_++;

  std::vector<FilterVerdict> out;
  const int ready = newest - k_;
  if (ready >= 0) {
    out.push_back(settle(ready, newest));
    next_verdict_ = ready + 1;
    while (window_base_ < next_verdict_ - k_) {
      window_.pop_front();
      ++window_base_;
    }
  }
  return out;
}

std::vector<FilterVerdict> ThresholdStream::finish() {
  finished_ = true;
  std::vector<FilterVerdict> out;
  const int last = next_index_ - 1;
  for (int frame = next_verdict_; frame <= last; ++frame) out.push_back(settle(frame, last));
  next_verdict_ = next_index_;
  window_.clear();
  window_base_ = next_index_;
  return out;
}

}  // namespace triage::blur

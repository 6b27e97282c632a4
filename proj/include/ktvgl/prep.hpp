#pragma once

#include "ktvgl/io.hpp"

#include <string>

namespace ktvgl {

// CSV-to-series preprocessing: centered moving-average smoothing per series,
// then normalization. Output always has one sample per step.
struct PrepOptions {
  enum class Layout { kLong, kWide };
  enum class Normalize { kZScore, kMinMax };

  Layout layout = Layout::kLong;
  // Centered window length; truncated near the boundaries. 1 = no smoothing.
  int smooth_window = 4;
  // Z-score standardizes each series over time; min-max rescales the whole
  // tensor to [0, 1] with a single global range.
  Normalize normalize = Normalize::kZScore;
};

// Long layout: header row, then rows (time, key_1, ..., key_M, value).
// Wide layout: header row (time, key_1|...|key_M per column), then one row
// per step. Every (time, keys) cell must be present exactly once; time steps
// and mode keys are ordered by first appearance.
SeriesData prep_csv(const std::string& csv_text, const PrepOptions& options);
SeriesData prep_csv_file(const std::string& path, const PrepOptions& options);

}  // namespace ktvgl

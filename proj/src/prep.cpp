#include "ktvgl/prep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace ktvgl {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (!trim(line).empty()) lines.push_back(line);
  }
  return lines;
}

double parse_value(const std::string& s) {
  const std::string field = trim(s);
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') throw DataError("non-numeric value '" + s + "'");
  if (!std::isfinite(v)) throw DataError("non-finite value '" + s + "'");
  return v;
}

// Key dictionary ordered by first appearance.
struct KeyIndex {
  std::vector<std::string> names;
  std::map<std::string, int> lookup;

  int intern(const std::string& key) {
    auto [it, inserted] = lookup.try_emplace(key, static_cast<int>(names.size()));
    if (inserted) names.push_back(key);
    return it->second;
  }
};

struct RawTable {
  std::vector<std::string> time_labels;
  std::vector<std::vector<std::string>> mode_labels;
  // values[t][cell], cell in canonical order; NaN marks a missing cell.
  std::vector<std::vector<double>> values;
};

RawTable ingest_long(const std::vector<std::string>& lines) {
  if (lines.size() < 2) throw DataError("long CSV needs a header row and at least one data row");
  const std::size_t columns = split(lines.front(), ',').size();
  if (columns < 3) throw DataError("long CSV needs time, at least one key column, and value");
  const int modes = static_cast<int>(columns) - 2;

  KeyIndex time_index;
  std::vector<KeyIndex> key_index(static_cast<std::size_t>(modes));
  struct Record {
    int t;
    std::vector<int> keys;
    double value;
  };
  std::vector<Record> records;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r], ',');
    if (fields.size() != columns) throw DataError("row " + std::to_string(r + 1) + " has wrong column count");
    Record rec;
    rec.t = time_index.intern(fields[0]);
    for (int m = 0; m < modes; ++m) {
      rec.keys.push_back(key_index[static_cast<std::size_t>(m)].intern(fields[static_cast<std::size_t>(m) + 1]));
    }
    rec.value = parse_value(fields.back());
    records.push_back(std::move(rec));
  }

  std::vector<int> dims;
  for (const auto& ki : key_index) dims.push_back(static_cast<int>(ki.names.size()));
  const std::int64_t cells = shape_size(dims);

  RawTable table;
  table.time_labels = time_index.names;
  for (auto& ki : key_index) table.mode_labels.push_back(std::move(ki.names));
  table.values.assign(time_index.lookup.size(),
                      std::vector<double>(static_cast<std::size_t>(cells), std::numeric_limits<double>::quiet_NaN()));
  for (const Record& rec : records) {
    std::int64_t linear = 0;
    for (int m = 0; m < modes; ++m) {
      linear = linear * dims[static_cast<std::size_t>(m)] + rec.keys[static_cast<std::size_t>(m)];
    }
    double& slot = table.values[static_cast<std::size_t>(rec.t)][static_cast<std::size_t>(linear)];
    if (!std::isnan(slot)) throw DataError("duplicate cell in CSV (time, keys repeated)");
    slot = rec.value;
  }
  return table;
}

RawTable ingest_wide(const std::vector<std::string>& lines) {
  if (lines.size() < 2) throw DataError("wide CSV needs a header row and at least one data row");
  const auto header = split(lines.front(), ',');
  if (header.size() < 2) throw DataError("wide CSV needs a time column plus data columns");

  const int modes = static_cast<int>(split(header[1], '|').size());
  std::vector<KeyIndex> key_index(static_cast<std::size_t>(modes));
  std::vector<std::vector<int>> column_keys;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const auto parts = split(header[c], '|');
    if (static_cast<int>(parts.size()) != modes) {
      throw DataError("column '" + header[c] + "' does not have " + std::to_string(modes) + " |-separated keys");
    }
    std::vector<int> keys;
    for (int m = 0; m < modes; ++m) {
      keys.push_back(key_index[static_cast<std::size_t>(m)].intern(parts[static_cast<std::size_t>(m)]));
    }
    column_keys.push_back(std::move(keys));
  }

  std::vector<int> dims;
  for (const auto& ki : key_index) dims.push_back(static_cast<int>(ki.names.size()));
  const std::int64_t cells = shape_size(dims);
  if (static_cast<std::int64_t>(column_keys.size()) != cells) {
    throw DataError("wide CSV columns do not cover the full key product (tensor must be complete)");
  }

  RawTable table;
  for (auto& ki : key_index) table.mode_labels.push_back(std::move(ki.names));
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r], ',');
    if (fields.size() != header.size()) throw DataError("row " + std::to_string(r + 1) + " has wrong column count");
    table.time_labels.push_back(fields[0]);
    std::vector<double> row(static_cast<std::size_t>(cells), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t c = 1; c < fields.size(); ++c) {
      std::int64_t linear = 0;
      for (int m = 0; m < modes; ++m) {
        linear = linear * dims[static_cast<std::size_t>(m)] + column_keys[c - 1][static_cast<std::size_t>(m)];
      }
      double& slot = row[static_cast<std::size_t>(linear)];
      if (!std::isnan(slot)) throw DataError("duplicate column keys in wide CSV");
      slot = parse_value(fields[c]);
    }
    table.values.push_back(std::move(row));
  }
  return table;
}

}  // namespace

SeriesData prep_csv(const std::string& csv_text, const PrepOptions& options) {
  if (options.smooth_window < 1) throw std::invalid_argument("smoothing window must be >= 1");
  const auto lines = read_lines(csv_text);
  RawTable table = options.layout == PrepOptions::Layout::kLong ? ingest_long(lines) : ingest_wide(lines);

  const int T = static_cast<int>(table.values.size());
  if (T < 1) throw DataError("CSV contains no data rows");
  const std::int64_t cells = static_cast<std::int64_t>(table.values.front().size());
  for (const auto& row : table.values) {
    for (double v : row) {
      if (std::isnan(v)) throw DataError("missing cell: the tensor must be complete");
    }
  }

  // Smoothing: centered moving average per series, truncated at the ends.
  const int k = options.smooth_window;
  const int left = (k - 1) / 2;
  const int right = k / 2;
  std::vector<std::vector<double>> smoothed(table.values);
  if (k > 1) {
    for (std::int64_t c = 0; c < cells; ++c) {
      for (int t = 0; t < T; ++t) {
        const int lo = std::max(0, t - left);
        const int hi = std::min(T - 1, t + right);
        double sum = 0.0;
        for (int u = lo; u <= hi; ++u) sum += table.values[static_cast<std::size_t>(u)][static_cast<std::size_t>(c)];
        smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] = sum / static_cast<double>(hi - lo + 1);
      }
    }
  }

  if (options.normalize == PrepOptions::Normalize::kZScore) {
    for (std::int64_t c = 0; c < cells; ++c) {
      double mean = 0.0;
      for (int t = 0; t < T; ++t) mean += smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
      mean /= static_cast<double>(T);
      double var = 0.0;
      for (int t = 0; t < T; ++t) {
        const double d = smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)] - mean;
        var += d * d;
      }
      var /= static_cast<double>(T);
      if (var <= 0.0) throw DataError("cannot z-normalize a constant series");
      const double inv_std = 1.0 / std::sqrt(var);
      for (int t = 0; t < T; ++t) {
        auto& v = smoothed[static_cast<std::size_t>(t)][static_cast<std::size_t>(c)];
        v = (v - mean) * inv_std;
      }
    }
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& row : smoothed) {
      for (double v : row) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (hi <= lo) throw DataError("cannot min-max normalize constant data");
    for (auto& row : smoothed) {
      for (auto& v : row) v = (v - lo) / (hi - lo);
    }
  }

  std::vector<int> dims;
  for (const auto& labels : table.mode_labels) dims.push_back(static_cast<int>(labels.size()));
  std::vector<std::vector<DenseTensor>> samples;
  samples.reserve(static_cast<std::size_t>(T));
  for (int t = 0; t < T; ++t) {
    samples.push_back({DenseTensor(dims, std::move(smoothed[static_cast<std::size_t>(t)]))});
  }

  SeriesLabels labels;
  labels.mode_labels = std::move(table.mode_labels);
  labels.time_labels = std::move(table.time_labels);
  return SeriesData{TensorSeries(dims, std::move(samples)), std::move(labels)};
}

SeriesData prep_csv_file(const std::string& path, const PrepOptions& options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return prep_csv(buffer.str(), options);
}

}  // namespace ktvgl

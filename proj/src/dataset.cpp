#include "tagsense/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "tagsense/error.hpp"
#include "tagsense/textio.hpp"

namespace tagsense {

namespace {

constexpr std::array<std::string_view, 6> kGroups = {"acc_x", "acc_y", "acc_z",
                                                     "gyr_x", "gyr_y", "gyr_z"};
constexpr std::size_t kColumns = 1 + kGroups.size() * kSamplesPerSecond + 1;

std::string two_digit(std::size_t i) {
  std::string s = std::to_string(i);
  return i < 10 ? "0" + s : s;
}

// Points at the first column group whose width is wrong, so that a header
// with e.g. 49 acc_x columns is reported as such rather than as a generic
// mismatch.
void check_header(const std::vector<std::string_view>& cols) {
  const auto expected = burst_csv_header();
  if (cols.size() == expected.size() &&
      std::equal(cols.begin(), cols.end(), expected.begin())) {
    return;
  }
  std::map<std::string, std::size_t, std::less<>> widths;
  for (const auto col : cols) {
    const auto us = col.rfind('_');
    if (us == std::string_view::npos) continue;
    widths[std::string(col.substr(0, us))]++;
  }
  for (const auto group : kGroups) {
    const auto it = widths.find(group);
    const std::size_t n = it == widths.end() ? 0 : it->second;
    if (n != kSamplesPerSecond) {
      throw FormatError("header: column group " + std::string(group) + " has " +
                        std::to_string(n) + " columns, expected " +
                        std::to_string(kSamplesPerSecond));
    }
  }
  for (std::size_t i = 0; i < std::min(cols.size(), expected.size()); ++i) {
    if (cols[i] != expected[i]) {
      throw FormatError("header: column " + std::to_string(i + 1) + " is '" +
                        std::string(cols[i]) + "', expected '" + expected[i] + "'");
    }
  }
  throw FormatError("header: expected " + std::to_string(expected.size()) + " columns, got " +
                    std::to_string(cols.size()));
}

}  // namespace

void validate_behaviour_name(std::string_view name) {
  if (name.empty()) throw LabelError("empty behaviour name");
  for (const char c : name) {
    if (c == ',' || c == ';' || c == '\n' || c == '\r' || c == ' ' || c == '\t') {
      throw LabelError("behaviour name '" + std::string(name) +
                       "' contains a separator or whitespace");
    }
  }
}

Dataset::Dataset(std::vector<std::string> behaviours, std::vector<SensorRecord> records,
                 std::string source_id)
    : behaviours_(std::move(behaviours)),
      records_(std::move(records)),
      source_id_(std::move(source_id)) {
  std::unordered_set<std::string> seen;
  for (const auto& b : behaviours_) {
    validate_behaviour_name(b);
    if (!seen.insert(b).second) throw LabelError("duplicate behaviour '" + b + "'");
  }
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const auto& rec = records_[r];
    if (rec.label >= behaviours_.size()) {
      throw LabelError("record " + std::to_string(r) + ": label index " +
                       std::to_string(rec.label) + " out of range");
    }
    if (r > 0 && rec.timestamp <= records_[r - 1].timestamp) {
      throw ValueError("record " + std::to_string(r) + ": timestamp " +
                       std::to_string(rec.timestamp) + " is not increasing");
    }
    for (const auto* axes : {&rec.acc, &rec.gyro}) {
      for (const auto& burst : *axes) {
        for (const double v : burst) {
          if (!std::isfinite(v)) {
            throw ValueError("record " + std::to_string(r) + ": non-finite sample");
          }
        }
      }
    }
  }
}

std::optional<std::size_t> Dataset::behaviour_index(std::string_view name) const {
  const auto it = std::find(behaviours_.begin(), behaviours_.end(), name);
  if (it == behaviours_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - behaviours_.begin());
}

double quantize_sample(double value) {
  constexpr double kScale = 1e6;
  return std::round(value * kScale) / kScale;
}

std::vector<std::string> burst_csv_header() {
  std::vector<std::string> cols;
  cols.reserve(kColumns);
  cols.emplace_back("timestamp");
  for (const auto group : kGroups) {
    for (std::size_t i = 0; i < kSamplesPerSecond; ++i) {
      cols.push_back(std::string(group) + "_" + two_digit(i));
    }
  }
  cols.emplace_back("label");
  return cols;
}

Dataset parse_burst_csv(std::string_view text,
                        const std::optional<std::vector<std::string>>& declared,
                        std::string source_id) {
  const auto rows = textio::lines(text);
  if (rows.empty()) throw FormatError("missing header row");
  check_header(textio::split(rows.front(), ','));

  std::vector<std::string> behaviours = declared.value_or(std::vector<std::string>{});
  std::vector<SensorRecord> records;
  records.reserve(rows.size() - 1);

  for (std::size_t li = 1; li < rows.size(); ++li) {
    const auto line = rows[li];
    if (line.empty()) continue;
    const std::string where = "row " + std::to_string(li);
    const auto cells = textio::split(line, ',');
    if (cells.size() != kColumns) {
      throw ValueError(where + ": expected " + std::to_string(kColumns) + " cells, got " +
                       std::to_string(cells.size()));
    }
    SensorRecord rec;
    const auto ts = textio::parse_int(cells[0]);
    if (!ts) throw ValueError(where + ": bad timestamp '" + std::string(cells[0]) + "'");
    rec.timestamp = *ts;

    std::size_t c = 1;
    for (auto* axes : {&rec.acc, &rec.gyro}) {
      for (auto& burst : *axes) {
        for (auto& sample : burst) {
          const auto v = textio::parse_double(cells[c]);
          if (!v || !std::isfinite(*v)) {
            throw ValueError(where + ", column " + std::to_string(c + 1) +
                             ": missing or non-finite value '" + std::string(cells[c]) + "'");
          }
          sample = *v;
          ++c;
        }
      }
    }

    const std::string label(cells[c]);
    auto it = std::find(behaviours.begin(), behaviours.end(), label);
    if (it == behaviours.end()) {
      if (declared) throw LabelError(where + ": unknown label '" + label + "'");
      if (label.empty()) throw LabelError(where + ": empty label");
      behaviours.push_back(label);
      it = behaviours.end() - 1;
    }
    rec.label = static_cast<std::size_t>(it - behaviours.begin());
    records.push_back(rec);
  }

  try {
    return Dataset(std::move(behaviours), std::move(records), std::move(source_id));
  } catch (const ValueError& e) {
    throw ValueError(std::string("invalid dataset: ") + e.what());
  }
}

Dataset ingest_csv(const std::filesystem::path& path,
                   const std::optional<std::vector<std::string>>& declared) {
  return parse_burst_csv(textio::read_file(path), declared, path.stem().string());
}

std::string to_burst_csv(const Dataset& ds) {
  std::string out;
  out.reserve((ds.size() + 1) * kColumns * 10);
  const auto header = burst_csv_header();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out.push_back(',');
    out += header[i];
  }
  out.push_back('\n');
  for (const auto& rec : ds.records()) {
    out += std::to_string(rec.timestamp);
    for (const auto* axes : {&rec.acc, &rec.gyro}) {
      for (const auto& burst : *axes) {
        for (const double v : burst) {
          out.push_back(',');
          out += textio::format_fixed(v, kCsvFractionDigits);
        }
      }
    }
    out.push_back(',');
    out += ds.behaviours()[rec.label];
    out.push_back('\n');
  }
  return out;
}

void export_csv(const Dataset& ds, const std::filesystem::path& path) {
  textio::write_file_atomic(path, to_burst_csv(ds));
}

double class_frequency(const Dataset& ds, std::string_view behaviour) {
  const auto idx = ds.behaviour_index(behaviour);
  if (!idx) throw LabelError("unknown behaviour '" + std::string(behaviour) + "'");
  if (ds.empty()) return 0.0;
  const auto n = std::count_if(ds.records().begin(), ds.records().end(),
                               [&](const SensorRecord& r) { return r.label == *idx; });
  return static_cast<double>(n) / static_cast<double>(ds.size());
}

}  // namespace tagsense

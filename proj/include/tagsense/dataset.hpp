#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tagsense {

inline constexpr std::size_t kSamplesPerSecond = 50;
inline constexpr std::size_t kAxes = 3;
// Fraction digits written to burst CSV files.
inline constexpr int kCsvFractionDigits = 6;

using Burst = std::array<double, kSamplesPerSecond>;
using TriaxialBurst = std::array<Burst, kAxes>;

// One labelled second: 50 Hz bursts of the accelerometer (m/s^2) and
// gyroscope (rad/s) axes.
struct SensorRecord {
  std::int64_t timestamp{0};
  TriaxialBurst acc{};
  TriaxialBurst gyro{};
  std::size_t label{0};

  bool operator==(const SensorRecord&) const = default;
};

// Ordered, validated collection of records. Immutable after construction.
class Dataset {
 public:
  Dataset() = default;

  // Throws LabelError for duplicate/invalid behaviour names or out-of-range
  // labels, ValueError for non-finite samples or non-increasing timestamps.
  Dataset(std::vector<std::string> behaviours, std::vector<SensorRecord> records,
          std::string source_id = {});

  const std::vector<std::string>& behaviours() const { return behaviours_; }
  const std::vector<SensorRecord>& records() const { return records_; }
  const std::string& source_id() const { return source_id_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  std::optional<std::size_t> behaviour_index(std::string_view name) const;

  // Content equality; the source tag is not part of the content.
  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.behaviours_ == b.behaviours_ && a.records_ == b.records_;
  }

 private:
  std::vector<std::string> behaviours_;
  std::vector<SensorRecord> records_;
  std::string source_id_;
};

// Throws LabelError if `name` cannot be carried in the CSV/text formats.
void validate_behaviour_name(std::string_view name);

// Rounds a sample onto the grid the CSV format stores exactly.
double quantize_sample(double value);

// Column names of the burst CSV, in order.
std::vector<std::string> burst_csv_header();

// Parses burst CSV text. With `declared` set, labels outside it raise
// LabelError and the behaviour order is the declared one; otherwise
// behaviours are taken from the labels in order of first appearance.
Dataset parse_burst_csv(std::string_view text,
                        const std::optional<std::vector<std::string>>& declared = std::nullopt,
                        std::string source_id = {});

Dataset ingest_csv(const std::filesystem::path& path,
                   const std::optional<std::vector<std::string>>& declared = std::nullopt);

std::string to_burst_csv(const Dataset& ds);
void export_csv(const Dataset& ds, const std::filesystem::path& path);

// Fraction of records labelled `behaviour`; LabelError if undeclared.
double class_frequency(const Dataset& ds, std::string_view behaviour);

}  // namespace tagsense

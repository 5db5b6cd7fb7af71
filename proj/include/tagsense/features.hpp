#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagsense/dataset.hpp"

namespace tagsense {

// Order is part of the public contract: mask bit i is FeatureId i.
enum class FeatureId : std::uint8_t { AX, AY, AZ, VEDBA, GX, GY, GZ, GVEDBA };
inline constexpr std::size_t kFeatureCount = 8;

inline constexpr std::array<FeatureId, kFeatureCount> kAllFeatures = {
    FeatureId::AX, FeatureId::AY, FeatureId::AZ, FeatureId::VEDBA,
    FeatureId::GX, FeatureId::GY, FeatureId::GZ, FeatureId::GVEDBA};

constexpr std::size_t index(FeatureId f) { return static_cast<std::size_t>(f); }

// Column name used in CSV files and model text ("VEDBA").
std::string_view feature_name(FeatureId f);
// Name used in ranking reports ("VeDBA").
std::string_view feature_display_name(FeatureId f);
// Case-insensitive; accepts both spellings.
std::optional<FeatureId> parse_feature(std::string_view name);

// Subset of the eight features.
class FeatureMask {
 public:
  constexpr FeatureMask() = default;
  constexpr explicit FeatureMask(std::uint8_t bits) : bits_(bits) {}

  static constexpr FeatureMask full() { return FeatureMask(0xFF); }
  static FeatureMask of(std::initializer_list<FeatureId> features);
  // "AX;GX;GZ" (any separator of ';' or ','; trailing separator allowed),
  // or "all". Throws ConfigError on unknown names.
  static FeatureMask parse(std::string_view text);

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr bool contains(FeatureId f) const { return (bits_ >> index(f)) & 1U; }
  std::size_t count() const;
  // Members in FeatureId order.
  std::vector<FeatureId> features() const;

  // Report rendering: gyroscope axes, accelerometer axes, VeDBA, GVeDBA,
  // each followed by ';' (e.g. "GX;GZ;AX;").
  std::string to_string() const;

  constexpr bool operator==(const FeatureMask&) const = default;

 private:
  std::uint8_t bits_{0};
};

using FeatureValues = std::array<double, kFeatureCount>;

struct FeatureVector {
  FeatureValues values{};
  std::size_t label{0};
  std::int64_t timestamp{0};

  double operator[](FeatureId f) const { return values[index(f)]; }
  bool operator==(const FeatureVector&) const = default;
};

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<std::string> behaviours;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::optional<std::size_t> behaviour_index(std::string_view name) const;

  bool operator==(const FeatureMatrix&) const = default;
};

// Throws LabelError/ValueError when a row breaks the matrix invariants.
void validate(const FeatureMatrix& fm);

double segment_mean(std::span<const double> burst);
// Population variance (divides by the sample count).
double segment_var(std::span<const double> burst);

// Mean magnitude of the dynamic component, the static component of each axis
// being its within-burst mean. Throws ShapeError unless each axis holds
// exactly 50 samples.
double vedba(std::span<const double> x, std::span<const double> y, std::span<const double> z);
double vedba(const TriaxialBurst& acc);
// Same computation applied to gyroscope axes.
double gvedba(const TriaxialBurst& gyro);

FeatureVector featurize(const SensorRecord& rec);
FeatureMatrix featurize(const Dataset& ds);

std::string to_feature_csv(const FeatureMatrix& fm);
FeatureMatrix parse_feature_csv(std::string_view text);
void export_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& path);
FeatureMatrix ingest_feature_csv(const std::filesystem::path& path);

}  // namespace tagsense

#include "tagsense/features.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>

#include "tagsense/error.hpp"
#include "tagsense/textio.hpp"

namespace tagsense {

namespace {

constexpr std::array<std::string_view, kFeatureCount> kNames = {
    "AX", "AY", "AZ", "VEDBA", "GX", "GY", "GZ", "GVEDBA"};
constexpr std::array<std::string_view, kFeatureCount> kDisplayNames = {
    "AX", "AY", "AZ", "VeDBA", "GX", "GY", "GZ", "GVeDBA"};
constexpr std::array<FeatureId, kFeatureCount> kDisplayOrder = {
    FeatureId::GX, FeatureId::GY, FeatureId::GZ, FeatureId::AX,
    FeatureId::AY, FeatureId::AZ, FeatureId::VEDBA, FeatureId::GVEDBA};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::toupper(static_cast<unsigned char>(x)) ==
                  std::toupper(static_cast<unsigned char>(y));
         });
}

void check_length(std::span<const double> burst) {
  if (burst.size() != kSamplesPerSecond) {
    throw ShapeError("burst has " + std::to_string(burst.size()) + " samples, expected " +
                     std::to_string(kSamplesPerSecond));
  }
}

}  // namespace

std::string_view feature_name(FeatureId f) { return kNames[index(f)]; }
std::string_view feature_display_name(FeatureId f) { return kDisplayNames[index(f)]; }

std::optional<FeatureId> parse_feature(std::string_view name) {
  for (const auto f : kAllFeatures) {
    if (iequals(name, kNames[index(f)])) return f;
  }
  return std::nullopt;
}

FeatureMask FeatureMask::of(std::initializer_list<FeatureId> features) {
  std::uint8_t bits = 0;
  for (const auto f : features) bits |= static_cast<std::uint8_t>(1U << index(f));
  return FeatureMask(bits);
}

FeatureMask FeatureMask::parse(std::string_view text) {
  text = textio::trim(text);
  if (iequals(text, "all")) return full();
  std::uint8_t bits = 0;
  std::string normalized(text);
  std::replace(normalized.begin(), normalized.end(), ',', ';');
  for (auto tok : textio::split(normalized, ';')) {
    tok = textio::trim(tok);
    if (tok.empty()) continue;
    const auto f = parse_feature(tok);
    if (!f) throw ConfigError("unknown feature '" + std::string(tok) + "'");
    bits |= static_cast<std::uint8_t>(1U << index(*f));
  }
  if (bits == 0) throw ConfigError("feature mask is empty");
  return FeatureMask(bits);
}

std::size_t FeatureMask::count() const { return static_cast<std::size_t>(std::popcount(bits_)); }

std::vector<FeatureId> FeatureMask::features() const {
  std::vector<FeatureId> out;
  for (const auto f : kAllFeatures) {
    if (contains(f)) out.push_back(f);
  }
  return out;
}

std::string FeatureMask::to_string() const {
  std::string out;
  for (const auto f : kDisplayOrder) {
    if (!contains(f)) continue;
    out += feature_display_name(f);
    out.push_back(';');
  }
  return out;
}

std::optional<std::size_t> FeatureMatrix::behaviour_index(std::string_view name) const {
  const auto it = std::find(behaviours.begin(), behaviours.end(), name);
  if (it == behaviours.end()) return std::nullopt;
  return static_cast<std::size_t>(it - behaviours.begin());
}

void validate(const FeatureMatrix& fm) {
  for (std::size_t i = 0; i < fm.behaviours.size(); ++i) {
    validate_behaviour_name(fm.behaviours[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (fm.behaviours[i] == fm.behaviours[j]) {
        throw LabelError("duplicate behaviour '" + fm.behaviours[i] + "'");
      }
    }
  }
  for (std::size_t r = 0; r < fm.rows.size(); ++r) {
    const auto& row = fm.rows[r];
    if (row.label >= fm.behaviours.size()) {
      throw LabelError("feature row " + std::to_string(r) + ": label out of range");
    }
    for (const double v : row.values) {
      if (!std::isfinite(v)) throw ValueError("feature row " + std::to_string(r) + ": non-finite value");
    }
  }
}

double segment_mean(std::span<const double> burst) {
  check_length(burst);
  // Neumaier-compensated sum.
  double sum = 0.0;
  double c = 0.0;
  for (const double v : burst) {
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return (sum + c) / static_cast<double>(burst.size());
}

double segment_var(std::span<const double> burst) {
  check_length(burst);
  // Welford update.
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (const double v : burst) {
    ++n;
    const double delta = v - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (v - mean);
  }
  return std::max(0.0, m2 / static_cast<double>(n));
}

double vedba(std::span<const double> x, std::span<const double> y, std::span<const double> z) {
  const double sx = segment_mean(x);
  const double sy = segment_mean(y);
  const double sz = segment_mean(z);
  double total = 0.0;
  for (std::size_t i = 0; i < kSamplesPerSecond; ++i) {
    total += std::hypot(x[i] - sx, y[i] - sy, z[i] - sz);
  }
  return total / static_cast<double>(kSamplesPerSecond);
}

double vedba(const TriaxialBurst& acc) { return vedba(acc[0], acc[1], acc[2]); }

double gvedba(const TriaxialBurst& gyro) { return vedba(gyro); }

FeatureVector featurize(const SensorRecord& rec) {
  FeatureVector fv;
  fv.label = rec.label;
  fv.timestamp = rec.timestamp;
  fv.values[index(FeatureId::AX)] = segment_mean(rec.acc[0]);
  fv.values[index(FeatureId::AY)] = segment_mean(rec.acc[1]);
  fv.values[index(FeatureId::AZ)] = segment_mean(rec.acc[2]);
  fv.values[index(FeatureId::VEDBA)] = vedba(rec.acc);
  fv.values[index(FeatureId::GX)] = segment_var(rec.gyro[0]);
  fv.values[index(FeatureId::GY)] = segment_var(rec.gyro[1]);
  fv.values[index(FeatureId::GZ)] = segment_var(rec.gyro[2]);
  fv.values[index(FeatureId::GVEDBA)] = gvedba(rec.gyro);
  return fv;
}

FeatureMatrix featurize(const Dataset& ds) {
  FeatureMatrix fm;
  fm.behaviours = ds.behaviours();
  fm.rows.reserve(ds.size());
  for (const auto& rec : ds.records()) fm.rows.push_back(featurize(rec));
  return fm;
}

std::string to_feature_csv(const FeatureMatrix& fm) {
  std::string out = "timestamp";
  for (const auto f : kAllFeatures) {
    out.push_back(',');
    out += feature_name(f);
  }
  out += ",label\n";
  for (const auto& row : fm.rows) {
    out += std::to_string(row.timestamp);
    for (const double v : row.values) {
      out.push_back(',');
      out += textio::format_shortest(v);
    }
    out.push_back(',');
    out += fm.behaviours.at(row.label);
    out.push_back('\n');
  }
  return out;
}

FeatureMatrix parse_feature_csv(std::string_view text) {
  const auto rows = textio::lines(text);
  if (rows.empty()) throw FormatError("feature csv: missing header row");
  const auto header = textio::split(rows.front(), ',');
  bool header_ok = header.size() == kFeatureCount + 2 && header.front() == "timestamp" &&
                   header.back() == "label";
  for (std::size_t i = 0; header_ok && i < kFeatureCount; ++i) {
    header_ok = header[i + 1] == kNames[i];
  }
  if (!header_ok) {
    throw FormatError("feature csv: header must be timestamp,AX,AY,AZ,VEDBA,GX,GY,GZ,GVEDBA,label");
  }

  FeatureMatrix fm;
  for (std::size_t li = 1; li < rows.size(); ++li) {
    if (rows[li].empty()) continue;
    const std::string where = "feature csv row " + std::to_string(li);
    const auto cells = textio::split(rows[li], ',');
    if (cells.size() != kFeatureCount + 2) {
      throw ValueError(where + ": expected " + std::to_string(kFeatureCount + 2) + " cells");
    }
    FeatureVector fv;
    const auto ts = textio::parse_int(cells[0]);
    if (!ts) throw ValueError(where + ": bad timestamp");
    fv.timestamp = *ts;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto v = textio::parse_double(cells[i + 1]);
      if (!v || !std::isfinite(*v)) {
        throw ValueError(where + ": missing or non-finite " + std::string(kNames[i]));
      }
      fv.values[i] = *v;
    }
    const std::string label(cells.back());
    auto idx = fm.behaviour_index(label);
    if (!idx) {
      validate_behaviour_name(label);
      fm.behaviours.push_back(label);
      idx = fm.behaviours.size() - 1;
    }
    fv.label = *idx;
    fm.rows.push_back(fv);
  }
  return fm;
}

void export_feature_csv(const FeatureMatrix& fm, const std::filesystem::path& path) {
  textio::write_file_atomic(path, to_feature_csv(fm));
}

FeatureMatrix ingest_feature_csv(const std::filesystem::path& path) {
  return parse_feature_csv(textio::read_file(path));
}

}  // namespace tagsense

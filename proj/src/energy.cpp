#include "tagsense/energy.hpp"

#include <array>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <utility>

#include "tagsense/error.hpp"
#include "tagsense/textio.hpp"

namespace tagsense {

namespace {

constexpr std::array<std::pair<Strategy, std::string_view>, 5> kStrategies = {{
    {Strategy::Regular, "regular"},
    {Strategy::Conditional, "conditional"},
    {Strategy::Selected, "selected"},
    {Strategy::Both, "both"},
    {Strategy::SignalOnly, "signal_only"},
}};

void require_non_negative(double v, std::string_view what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ValueError(std::string(what) + " must be a finite non-negative number");
  }
}

double* profile_field(DeviceProfile& dp, std::string_view key) {
  if (key == "tx_rate") return &dp.tx_rate;
  if (key == "tx_current") return &dp.tx_current;
  if (key == "supply_voltage") return &dp.supply_voltage;
  if (key == "clock_hz") return &dp.clock_hz;
  if (key == "active_current") return &dp.active_current;
  if (key == "bytes_per_sample") return &dp.bytes_per_sample;
  if (key == "imu_rate") return &dp.imu_rate;
  if (key == "env_rate") return &dp.env_rate;
  return nullptr;
}

}  // namespace

DeviceProfile wildfi_profile() { return DeviceProfile{}; }

void validate(const DeviceProfile& dp) {
  for (const double v : {dp.tx_rate, dp.tx_current, dp.supply_voltage, dp.clock_hz,
                         dp.active_current, dp.bytes_per_sample, dp.imu_rate, dp.env_rate}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ValueError("device profile '" + dp.name + "': every constant must be positive");
    }
  }
}

DeviceProfile parse_profile(std::string_view text) {
  DeviceProfile dp = wildfi_profile();
  dp.name = "custom";
  std::size_t n = 0;
  for (auto line : textio::lines(text)) {
    ++n;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = textio::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("profile line " + std::to_string(n) + ": expected key=value");
    }
    const auto key = textio::trim(line.substr(0, eq));
    const auto value = textio::trim(line.substr(eq + 1));
    if (key == "name") {
      dp.name = std::string(value);
      continue;
    }
    double* field = profile_field(dp, key);
    if (!field) throw FormatError("profile line " + std::to_string(n) + ": unknown key '" + std::string(key) + "'");
    const auto v = textio::parse_double(value);
    if (!v) throw FormatError("profile line " + std::to_string(n) + ": bad number '" + std::string(value) + "'");
    *field = *v;
  }
  validate(dp);
  return dp;
}

std::string profile_to_text(const DeviceProfile& dp) {
  std::string out = "name=" + dp.name + "\n";
  const std::array<std::pair<std::string_view, double>, 8> fields = {{
      {"tx_rate", dp.tx_rate},
      {"tx_current", dp.tx_current},
      {"supply_voltage", dp.supply_voltage},
      {"clock_hz", dp.clock_hz},
      {"active_current", dp.active_current},
      {"bytes_per_sample", dp.bytes_per_sample},
      {"imu_rate", dp.imu_rate},
      {"env_rate", dp.env_rate},
  }};
  for (const auto& [k, v] : fields) out += std::string(k) + "=" + textio::format_shortest(v) + "\n";
  return out;
}

DeviceProfile load_profile(std::string_view name_or_path) {
  if (name_or_path == "wildfi") return wildfi_profile();
  return parse_profile(textio::read_file(std::filesystem::path(name_or_path)));
}

std::string_view strategy_name(Strategy s) {
  for (const auto& [k, name] : kStrategies) {
    if (k == s) return name;
  }
  return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
  for (const auto& [k, n] : kStrategies) {
    if (n == name) return k;
  }
  if (name == "signal-only") return Strategy::SignalOnly;
  return std::nullopt;
}

void validate(const TransmissionPlan& plan) {
  if (!(plan.detection_fraction >= 0.0 && plan.detection_fraction <= 1.0)) {
    throw ValueError("detection fraction must lie in [0, 1]");
  }
  require_non_negative(plan.full_bytes_per_point, "full bytes per point");
  require_non_negative(plan.selected_bytes_per_point, "selected bytes per point");
  require_non_negative(plan.signal_bytes, "signal bytes");
  const bool uses_selected = plan.strategy == Strategy::Selected || plan.strategy == Strategy::Both;
  if (uses_selected && plan.selected_bytes_per_point > plan.full_bytes_per_point) {
    throw ValueError("selected bytes per point exceed the full point size");
  }
}

std::uint64_t detected_points(const TransmissionPlan& plan) {
  const double exact = plan.detection_fraction * static_cast<double>(plan.n_points);
  return static_cast<std::uint64_t>(std::floor(exact + 0.5));
}

std::uint64_t points_sent(const TransmissionPlan& plan) {
  switch (plan.strategy) {
    case Strategy::Regular:
    case Strategy::Selected:
      return plan.n_points;
    case Strategy::Conditional:
    case Strategy::Both:
    case Strategy::SignalOnly:
      return detected_points(plan);
  }
  return 0;
}

double plan_bytes(const TransmissionPlan& plan) {
  validate(plan);
  const auto points = static_cast<double>(points_sent(plan));
  switch (plan.strategy) {
    case Strategy::Regular:
    case Strategy::Conditional:
      return points * plan.full_bytes_per_point;
    case Strategy::Selected:
    case Strategy::Both:
      return points * plan.selected_bytes_per_point;
    case Strategy::SignalOnly:
      return points * plan.signal_bytes;
  }
  return 0.0;
}

double payload_bytes_per_second(FeatureMask mask, const DeviceProfile& dp) {
  double bytes = 0.0;
  for (const auto f : mask.features()) {
    const bool derived = f == FeatureId::VEDBA || f == FeatureId::GVEDBA;
    bytes += derived ? dp.bytes_per_sample
                     : dp.bytes_per_sample * static_cast<double>(kSamplesPerSecond);
  }
  return bytes;
}

double tx_time(double bytes, const DeviceProfile& dp) {
  require_non_negative(bytes, "payload length");
  return bytes / dp.tx_rate;
}

double tx_energy(double bytes, const DeviceProfile& dp) {
  require_non_negative(bytes, "payload length");
  return dp.tx_power() * bytes / dp.tx_rate;
}

double tx_charge(double bytes, const DeviceProfile& dp) {
  return dp.tx_current * tx_time(bytes, dp) * 1000.0;
}

double compute_energy(long long cycles, const DeviceProfile& dp) {
  if (cycles < 0) throw ValueError("cycle count must be non-negative");
  return static_cast<double>(cycles) / dp.clock_hz * dp.active_power();
}

double classifier_cost(const TreeModel& m, const DeviceProfile& dp, long long cycles_per_comparison) {
  if (cycles_per_comparison < 1) throw ValueError("cycles per comparison must be >= 1");
  return compute_energy(static_cast<long long>(m.depth()) * cycles_per_comparison, dp);
}

double runtime_extension(double base_days, double overhead_full, double remaining_fraction) {
  if (!(base_days > 0.0)) throw ValueError("base runtime must be positive");
  if (!(overhead_full >= 0.0)) throw ValueError("transmission overhead must be non-negative");
  if (!(remaining_fraction >= 0.0 && remaining_fraction <= 1.0)) {
    throw ValueError("remaining fraction must lie in [0, 1]");
  }
  return base_days * (1.0 + overhead_full) / (1.0 + remaining_fraction * overhead_full);
}

EnergyReport report(const TransmissionPlan& plan, const DeviceProfile& dp) {
  validate(dp);
  EnergyReport r;
  r.strategy = plan.strategy;
  r.n_points = plan.n_points;
  r.points_sent = points_sent(plan);
  r.bytes_total = plan_bytes(plan);
  TransmissionPlan regular = plan;
  regular.strategy = Strategy::Regular;
  r.regular_bytes = plan_bytes(regular);
  r.tx_time = tx_time(r.bytes_total, dp);
  r.energy = tx_energy(r.bytes_total, dp);
  r.charge = tx_charge(r.bytes_total, dp);
  r.fraction_of_regular = r.regular_bytes > 0.0 ? r.bytes_total / r.regular_bytes : 1.0;
  r.reduction_vs_regular = 1.0 - r.fraction_of_regular;
  return r;
}

std::string to_text(const EnergyReport& r) {
  std::ostringstream out;
  auto row = [&](std::string_view label, const std::string& value) {
    out << std::left << std::setw(22) << label << value << "\n";
  };
  row("strategy", std::string(strategy_name(r.strategy)));
  row("points sent", std::to_string(r.points_sent) + " of " + std::to_string(r.n_points));
  row("bytes transmitted", textio::format_shortest(r.bytes_total) + " B");
  row("regular bytes", textio::format_shortest(r.regular_bytes) + " B");
  row("fraction of regular", textio::format_fixed(r.fraction_of_regular * 100.0, 2) + " %");
  row("reduction vs regular", textio::format_fixed(r.reduction_vs_regular * 100.0, 2) + " %");
  row("transmission time", textio::format_fixed(r.tx_time, 6) + " s");
  row("energy", textio::format_fixed(r.energy, 6) + " J");
  row("charge", textio::format_fixed(r.charge, 2) + " mA*s");
  return out.str();
}

std::string to_csv(const EnergyReport& r) {
  return "strategy,points_sent,n_points,bytes_total,regular_bytes,tx_time_s,energy_j,charge_mas,"
         "fraction_of_regular,reduction_vs_regular\n" +
         std::string(strategy_name(r.strategy)) + "," + std::to_string(r.points_sent) + "," +
         std::to_string(r.n_points) + "," + textio::format_shortest(r.bytes_total) + "," +
         textio::format_shortest(r.regular_bytes) + "," + textio::format_shortest(r.tx_time) + "," +
         textio::format_shortest(r.energy) + "," + textio::format_shortest(r.charge) + "," +
         textio::format_shortest(r.fraction_of_regular) + "," +
         textio::format_shortest(r.reduction_vs_regular) + "\n";
}

}  // namespace tagsense

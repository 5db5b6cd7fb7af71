#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "tagsense/cart.hpp"
#include "tagsense/features.hpp"

namespace tagsense {

// Radio and MCU constants of a tag. kB = 1000 B throughout.
struct DeviceProfile {
  std::string name{"wildfi"};
  double tx_rate{230'000.0};      // B/s
  double tx_current{0.108};       // A
  double supply_voltage{3.75};    // V
  double clock_hz{240e6};         // Hz
  double active_current{0.24};    // A
  double bytes_per_sample{2.0};   // B
  double imu_rate{900.0};         // B/s, 9-axis IMU at 50 Hz
  double env_rate{10.0};          // B/s, environmental sensor

  double tx_power() const { return supply_voltage * tx_current; }          // W
  double active_power() const { return supply_voltage * active_current; }  // W

  bool operator==(const DeviceProfile&) const = default;
};

DeviceProfile wildfi_profile();

// Throws ValueError unless every constant is finite and strictly positive.
void validate(const DeviceProfile& dp);

// key=value lines ('#' starts a comment). Keys not present keep the wildfi
// defaults; unknown keys raise FormatError.
DeviceProfile parse_profile(std::string_view text);
std::string profile_to_text(const DeviceProfile& dp);
// "wildfi" or a profile file path.
DeviceProfile load_profile(std::string_view name_or_path);

enum class Strategy { Regular, Conditional, Selected, Both, SignalOnly };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);

struct TransmissionPlan {
  Strategy strategy{Strategy::Regular};
  double detection_fraction{1.0};       // share of points showing the target behaviour
  double selected_bytes_per_point{0.0}; // payload of the selected fields
  double full_bytes_per_point{0.0};     // payload of a full data point
  std::uint64_t n_points{0};
  double signal_bytes{2.0};             // event token (unsigned short timestamp)
};

// Throws ValueError on p outside [0, 1], negative sizes or selected > full.
void validate(const TransmissionPlan& plan);

// round-half-up(p * n).
std::uint64_t detected_points(const TransmissionPlan& plan);
// Points the strategy transmits.
std::uint64_t points_sent(const TransmissionPlan& plan);
double plan_bytes(const TransmissionPlan& plan);

// Per-second payload of a feature subset: 100 B for each raw axis stream
// (50 samples x 2 B), 2 B for each derived scalar.
double payload_bytes_per_second(FeatureMask mask, const DeviceProfile& dp = wildfi_profile());

double tx_time(double bytes, const DeviceProfile& dp);
// V * I_tx * L / R in joules. ValueError for negative L.
double tx_energy(double bytes, const DeviceProfile& dp);
// I_tx * L / R in mA*s. ValueError for negative L.
double tx_charge(double bytes, const DeviceProfile& dp);

// (cycles / f) * V * I_active in joules. ValueError for negative cycles.
double compute_energy(long long cycles, const DeviceProfile& dp);

// Worst-case energy of one classification: one comparison per tree level.
double classifier_cost(const TreeModel& m, const DeviceProfile& dp, long long cycles_per_comparison);

// Runtime when transmission costs `overhead_full` on top of the base
// consumption and only `remaining_fraction` of the bytes are still sent:
// base_days * (1 + overhead) / (1 + remaining_fraction * overhead).
double runtime_extension(double base_days, double overhead_full, double remaining_fraction);

struct EnergyReport {
  Strategy strategy{Strategy::Regular};
  std::uint64_t points_sent{0};
  std::uint64_t n_points{0};
  double bytes_total{0.0};   // B
  double regular_bytes{0.0}; // B, regular strategy with the same n and full size
  double tx_time{0.0};       // s
  double energy{0.0};        // J
  double charge{0.0};        // mA*s
  double fraction_of_regular{0.0};
  double reduction_vs_regular{0.0};
};

EnergyReport report(const TransmissionPlan& plan, const DeviceProfile& dp);

std::string to_text(const EnergyReport& r);
std::string to_csv(const EnergyReport& r);

}  // namespace tagsense

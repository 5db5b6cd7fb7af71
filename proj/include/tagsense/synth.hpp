#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tagsense/dataset.hpp"

namespace tagsense {

// Signal model of one behaviour for the synthetic generator.
struct BehaviourModel {
  std::string name;
  std::array<double, kAxes> acc_mean{};    // static (gravity/posture) component, m/s^2
  double acc_noise{0.0};                   // white-noise stddev, m/s^2
  std::array<double, kAxes> gyro_noise{};  // white-noise stddev per axis, rad/s
  double motion_amplitude{0.0};            // periodic gait term, m/s^2
  double motion_frequency{0.0};            // Hz
  double posture_jitter{0.0};              // per-second stddev of acc_mean, m/s^2
  // Per-second stddev of the log activity level; the level scales the noise
  // and motion terms so that intensities of neighbouring behaviours overlap.
  double activity_jitter{0.0};

  bool operator==(const BehaviourModel&) const = default;
};

struct Bout {
  std::string behaviour;
  std::int64_t seconds{0};

  bool operator==(const Bout&) const = default;
};

struct SynthProtocol {
  std::string name;
  std::uint64_t seed{0};
  std::int64_t start_timestamp{0};
  std::vector<BehaviourModel> behaviours;
  std::vector<Bout> sequence;

  bool operator==(const SynthProtocol&) const = default;
};

// Throws ProtocolError on an empty sequence, non-positive durations,
// negative stddevs or bouts naming an unknown behaviour.
void validate(const SynthProtocol& proto);

// Pure function of the protocol. Behaviours are ordered by first appearance
// in the sequence; transitions between bouts are not emitted.
Dataset synthesize(const SynthProtocol& proto);

// Splits `total` into integer parts proportional to `weights` using the
// largest-remainder method (ties go to the lower index).
std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<double>& weights);

// "paper-ea60", "paper-ebf8", "paper-ed3c".
std::vector<std::string> preset_names();
SynthProtocol preset(std::string_view name);

std::string protocol_to_json(const SynthProtocol& proto);
SynthProtocol protocol_from_json(std::string_view text);

}  // namespace tagsense

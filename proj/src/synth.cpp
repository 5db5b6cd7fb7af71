#include "tagsense/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "tagsense/error.hpp"
#include "tagsense/rng.hpp"

namespace tagsense {

namespace {

struct PresetTable {
  std::string_view name;
  std::uint64_t seed;
  std::int64_t points;
  // lying, sitting, standing, walking, running (percent)
  std::array<double, 5> percent;
};

// Per-tag record counts and behaviour shares of the human recording.
constexpr std::array<PresetTable, 3> kPresets = {{
    {"paper-ea60", 0xEA60, 2350, {21.97, 11.58, 17.62, 41.51, 7.32}},
    {"paper-ebf8", 0xEBF8, 2320, {21.3, 11.82, 17.9, 41.57, 7.42}},
    {"paper-ed3c", 0xED3C, 2340, {21.98, 11.93, 12.44, 46.47, 7.18}},
}};

// Cap-brim mounted tag: gravity mostly on z, head posture tilts it.
std::vector<BehaviourModel> human_behaviours() {
  return {
      {"lying", {0.4, 9.6, 1.5}, 0.05, {0.04, 0.04, 0.04}, 0.0, 0.0, 0.8, 0.12},
      {"sitting", {1.0, 0.9, 9.6}, 0.08, {0.10, 0.10, 0.10}, 0.0, 0.0, 0.6, 0.12},
      {"standing", {0.6, 0.6, 9.7}, 0.12, {0.16, 0.18, 0.16}, 0.0, 0.0, 0.6, 0.12},
      {"walking", {0.8, 0.5, 9.6}, 0.4, {0.22, 0.22, 0.22}, 0.6, 1.8, 0.6, 0.12},
      {"running", {1.2, 0.4, 9.4}, 1.0, {0.7, 0.7, 0.7}, 5.0, 2.7, 1.0, 0.12},
  };
}

void fill_record(const BehaviourModel& b, std::int64_t ts, Rng& rng, SensorRecord& rec) {
  const double omega = 2.0 * std::numbers::pi * b.motion_frequency;
  std::array<double, kAxes> offset{};
  for (auto& o : offset) o = b.posture_jitter > 0.0 ? rng.normal(0.0, b.posture_jitter) : 0.0;
  const double level = b.activity_jitter > 0.0 ? std::exp(rng.normal(0.0, b.activity_jitter)) : 1.0;

  for (std::size_t i = 0; i < kSamplesPerSecond; ++i) {
    const double t = static_cast<double>(ts) + static_cast<double>(i) / kSamplesPerSecond;
    const double a = level * b.motion_amplitude;
    const std::array<double, kAxes> motion = {0.5 * a * std::sin(omega * t),
                                              0.3 * a * std::cos(omega * t),
                                              a * std::sin(2.0 * omega * t)};
    for (std::size_t ax = 0; ax < kAxes; ++ax) {
      const double noise = b.acc_noise > 0.0 ? rng.normal(0.0, level * b.acc_noise) : 0.0;
      rec.acc[ax][i] = quantize_sample(b.acc_mean[ax] + offset[ax] + motion[ax] + noise);
    }
    for (std::size_t ax = 0; ax < kAxes; ++ax) {
      const double phase = static_cast<double>(ax) * 2.0 * std::numbers::pi / 3.0;
      const double rot = 0.1 * a * std::sin(omega * t + phase);
      const double noise = b.gyro_noise[ax] > 0.0 ? rng.normal(0.0, level * b.gyro_noise[ax]) : 0.0;
      rec.gyro[ax][i] = quantize_sample(rot + noise);
    }
  }
}

}  // namespace

void validate(const SynthProtocol& proto) {
  if (proto.sequence.empty()) throw ProtocolError("protocol has an empty behaviour sequence");
  for (const auto& b : proto.behaviours) {
    if (b.acc_noise < 0.0 || b.posture_jitter < 0.0 || b.activity_jitter < 0.0 || b.motion_amplitude < 0.0 ||
        b.motion_frequency < 0.0 ||
        std::any_of(b.gyro_noise.begin(), b.gyro_noise.end(), [](double s) { return s < 0.0; })) {
      throw ProtocolError("behaviour '" + b.name + "': negative stddev or motion parameter");
    }
    try {
      validate_behaviour_name(b.name);
    } catch (const LabelError& e) {
      throw ProtocolError(e.what());
    }
  }
  for (const auto& bout : proto.sequence) {
    if (bout.seconds <= 0) {
      throw ProtocolError("bout of '" + bout.behaviour + "' has non-positive duration");
    }
    const auto it = std::find_if(proto.behaviours.begin(), proto.behaviours.end(),
                                 [&](const BehaviourModel& b) { return b.name == bout.behaviour; });
    if (it == proto.behaviours.end()) {
      throw ProtocolError("sequence names unknown behaviour '" + bout.behaviour + "'");
    }
  }
}

Dataset synthesize(const SynthProtocol& proto) {
  validate(proto);
  std::vector<std::string> names;
  std::vector<SensorRecord> records;
  Rng rng(proto.seed);
  std::int64_t ts = proto.start_timestamp;

  for (const auto& bout : proto.sequence) {
    const auto model = std::find_if(proto.behaviours.begin(), proto.behaviours.end(),
                                    [&](const BehaviourModel& b) { return b.name == bout.behaviour; });
    auto label_it = std::find(names.begin(), names.end(), bout.behaviour);
    if (label_it == names.end()) {
      names.push_back(bout.behaviour);
      label_it = names.end() - 1;
    }
    const auto label = static_cast<std::size_t>(label_it - names.begin());
    for (std::int64_t s = 0; s < bout.seconds; ++s) {
      SensorRecord rec;
      rec.timestamp = ts++;
      rec.label = label;
      fill_record(*model, rec.timestamp, rng, rec);
      records.push_back(rec);
    }
  }
  return Dataset(std::move(names), std::move(records), proto.name);
}

std::vector<std::int64_t> apportion(std::int64_t total, const std::vector<double>& weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::int64_t> parts(weights.size());
  std::vector<double> remainder(weights.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    parts[i] = static_cast<std::int64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(parts[i]);
    assigned += parts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < total && k < order.size(); ++k, ++assigned) {
    parts[order[k]]++;
  }
  return parts;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& p : kPresets) out.emplace_back(p.name);
  return out;
}

SynthProtocol preset(std::string_view name) {
  const auto it = std::find_if(kPresets.begin(), kPresets.end(),
                               [&](const PresetTable& p) { return p.name == name; });
  if (it == kPresets.end()) throw ProtocolError("unknown preset '" + std::string(name) + "'");

  SynthProtocol proto;
  proto.name = std::string(it->name);
  proto.seed = it->seed;
  proto.behaviours = human_behaviours();
  const auto counts =
      apportion(it->points, std::vector<double>(it->percent.begin(), it->percent.end()));
  // Two rounds through the task list, as a recording session would.
  for (int round = 0; round < 2; ++round) {
    for (std::size_t b = 0; b < counts.size(); ++b) {
      const std::int64_t first = counts[b] / 2;
      const std::int64_t seconds = round == 0 ? first : counts[b] - first;
      if (seconds > 0) proto.sequence.push_back({proto.behaviours[b].name, seconds});
    }
  }
  return proto;
}

std::string protocol_to_json(const SynthProtocol& proto) {
  nlohmann::ordered_json j;
  j["name"] = proto.name;
  j["seed"] = proto.seed;
  j["start_timestamp"] = proto.start_timestamp;
  j["behaviours"] = nlohmann::ordered_json::array();
  for (const auto& b : proto.behaviours) {
    j["behaviours"].push_back({{"name", b.name},
                               {"acc_mean", b.acc_mean},
                               {"acc_noise", b.acc_noise},
                               {"gyro_noise", b.gyro_noise},
                               {"motion_amplitude", b.motion_amplitude},
                               {"motion_frequency", b.motion_frequency},
                               {"posture_jitter", b.posture_jitter},
                               {"activity_jitter", b.activity_jitter}});
  }
  j["sequence"] = nlohmann::ordered_json::array();
  for (const auto& s : proto.sequence) {
    j["sequence"].push_back({{"behaviour", s.behaviour}, {"seconds", s.seconds}});
  }
  return j.dump(2) + "\n";
}

SynthProtocol protocol_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SynthProtocol proto;
    proto.name = j.value("name", std::string("custom"));
    proto.seed = j.at("seed").get<std::uint64_t>();
    proto.start_timestamp = j.value("start_timestamp", std::int64_t{0});
    for (const auto& b : j.at("behaviours")) {
      BehaviourModel m;
      m.name = b.at("name").get<std::string>();
      m.acc_mean = b.at("acc_mean").get<std::array<double, kAxes>>();
      m.acc_noise = b.value("acc_noise", 0.0);
      m.gyro_noise = b.value("gyro_noise", std::array<double, kAxes>{});
      m.motion_amplitude = b.value("motion_amplitude", 0.0);
      m.motion_frequency = b.value("motion_frequency", 0.0);
      m.posture_jitter = b.value("posture_jitter", 0.0);
      m.activity_jitter = b.value("activity_jitter", 0.0);
      proto.behaviours.push_back(std::move(m));
    }
    for (const auto& s : j.at("sequence")) {
      proto.sequence.push_back({s.at("behaviour").get<std::string>(), s.at("seconds").get<std::int64_t>()});
    }
    validate(proto);
    return proto;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("protocol file: ") + e.what());
  }
}

}  // namespace tagsense

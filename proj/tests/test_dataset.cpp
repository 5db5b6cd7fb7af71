#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "tagsense/dataset.hpp"
#include "tagsense/error.hpp"
#include "tagsense/rng.hpp"
#include "tagsense/textio.hpp"

using namespace tagsense;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / ("tagsense_test_dataset_" + name);
}

// Values on the 1e-6 grid so the fixed 6-digit CSV carries them exactly.
Dataset random_dataset(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  const std::vector<std::string> pool = {"lying", "sitting", "standing", "walking", "running"};
  std::vector<std::string> behaviours;
  std::vector<SensorRecord> records;
  std::int64_t ts = 1000;
  for (std::size_t r = 0; r < n; ++r) {
    SensorRecord rec;
    rec.timestamp = ts;
    ts += 1 + static_cast<std::int64_t>(rng.below(3));
    for (auto* axes : {&rec.acc, &rec.gyro}) {
      for (auto& burst : *axes) {
        for (auto& v : burst) v = quantize_sample(rng.uniform(-40.0, 40.0));
      }
    }
    const auto& name = pool[rng.below(pool.size())];
    auto it = std::find(behaviours.begin(), behaviours.end(), name);
    if (it == behaviours.end()) {
      behaviours.push_back(name);
      it = behaviours.end() - 1;
    }
    rec.label = static_cast<std::size_t>(it - behaviours.begin());
    records.push_back(rec);
  }
  return Dataset(behaviours, records, "random");
}

std::string header_line() {
  std::string h;
  for (const auto& c : burst_csv_header()) h += (h.empty() ? "" : ",") + c;
  return h;
}

std::string constant_row(std::int64_t ts, double v, const std::string& label) {
  std::string row = std::to_string(ts);
  for (int i = 0; i < 300; ++i) row += "," + textio::format_fixed(v, 6);
  return row + "," + label;
}

}  // namespace

TEST_CASE("header has timestamp, six 50-sample groups and label") {
  const auto h = burst_csv_header();
  REQUIRE(h.size() == 302);
  CHECK(h.front() == "timestamp");
  CHECK(h[1] == "acc_x_00");
  CHECK(h[50] == "acc_x_49");
  CHECK(h[151] == "gyr_x_00");
  CHECK(h[300] == "gyr_z_49");
  CHECK(h.back() == "label");
}

TEST_CASE("three well-formed rows parse with behaviours in appearance order") {
  const std::string text = header_line() + "\n" + constant_row(0, 1.5, "walking") + "\n" +
                           constant_row(1, 2.0, "lying") + "\n" + constant_row(2, -0.25, "walking") + "\n";
  const auto ds = parse_burst_csv(text);
  REQUIRE(ds.size() == 3);
  CHECK(ds.behaviours() == std::vector<std::string>{"walking", "lying"});
  CHECK(ds.records()[0].label == 0);
  CHECK(ds.records()[1].label == 1);
  CHECK(ds.records()[2].label == 0);
  CHECK(ds.records()[1].acc[2][49] == 2.0);
  CHECK(ds.records()[2].gyro[0][0] == -0.25);
}

TEST_CASE("a 49-column acc_x group is a format error naming the group") {
  auto cols = burst_csv_header();
  cols.erase(cols.begin() + 50);  // drop acc_x_49
  std::string h;
  for (const auto& c : cols) h += (h.empty() ? "" : ",") + c;
  try {
    parse_burst_csv(h + "\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("acc_x") != std::string::npos);
  }
}

TEST_CASE("missing or non-finite cells are value errors with the row index") {
  auto row = constant_row(0, 1.0, "lying");
  const auto bad_nan = header_line() + "\n" + constant_row(0, 1.0, "a") + "\n" +
                       std::string(row).replace(row.find(",1.000000"), 9, ",nan") + "\n";
  try {
    parse_burst_csv(bad_nan);
    FAIL("expected ValueError");
  } catch (const ValueError& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  const auto empty_cell = header_line() + "\n" + std::string(row).replace(row.find(",1.000000"), 9, ",") + "\n";
  CHECK_THROWS_AS(parse_burst_csv(empty_cell), ValueError);
  const auto short_row = header_line() + "\n0,1.0,lying\n";
  CHECK_THROWS_AS(parse_burst_csv(short_row), ValueError);
}

TEST_CASE("labels outside a declared behaviour list are label errors") {
  const auto text = header_line() + "\n" + constant_row(0, 1.0, "flying") + "\n";
  CHECK_THROWS_AS(parse_burst_csv(text, std::vector<std::string>{"lying", "sitting"}), LabelError);
  const auto ds = parse_burst_csv(header_line() + "\n" + constant_row(0, 1.0, "sitting") + "\n",
                                  std::vector<std::string>{"lying", "sitting"});
  CHECK(ds.records()[0].label == 1);
  CHECK(ds.behaviours().size() == 2);
}

TEST_CASE("timestamps must increase") {
  const auto text = header_line() + "\n" + constant_row(5, 1.0, "a") + "\n" + constant_row(5, 1.0, "a") + "\n";
  CHECK_THROWS_AS(parse_burst_csv(text), ValueError);
}

TEST_CASE("dataset constructor enforces its invariants") {
  SensorRecord rec;
  rec.label = 2;
  CHECK_THROWS_AS(Dataset({"a", "b"}, {rec}), LabelError);
  CHECK_THROWS_AS(Dataset({"a", "a"}, {}), LabelError);
  CHECK_THROWS_AS(Dataset({"has space"}, {}), LabelError);
  rec.label = 0;
  rec.gyro[1][3] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(Dataset({"a"}, {rec}), ValueError);
}

TEST_CASE("empty dataset exports a header-only file") {
  const auto text = to_burst_csv(Dataset({}, {}));
  CHECK(text == header_line() + "\n");
}

TEST_CASE("one record exports 301 value cells plus the label") {
  SensorRecord rec;
  rec.timestamp = 7;
  const auto text = to_burst_csv(Dataset({"lying"}, {rec}));
  const auto rows = textio::lines(text);
  REQUIRE(rows.size() == 2);
  const auto cells = textio::split(rows[1], ',');
  CHECK(cells.size() == 302);
  CHECK(cells.front() == "7");
  CHECK(cells.back() == "lying");
}

TEST_CASE("export then ingest is the identity on 100 random records") {
  const auto ds = random_dataset(100, 42);
  const auto path = temp_file("roundtrip.csv");
  export_csv(ds, path);
  const auto back = ingest_csv(path);
  CHECK(back == ds);
  CHECK(back.source_id() == path.stem().string());
  fs::remove(path);
}

TEST_CASE("ingest of a missing file is an io error") {
  CHECK_THROWS_AS(ingest_csv(temp_file("does_not_exist.csv")), IoError);
}

TEST_CASE("class frequency matches a counting loop and sums to one") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto ds = random_dataset(57, seed);
    double sum = 0.0;
    for (std::size_t b = 0; b < ds.behaviours().size(); ++b) {
      std::size_t count = 0;
      for (const auto& r : ds.records()) count += r.label == b ? 1 : 0;
      const double f = class_frequency(ds, ds.behaviours()[b]);
      CHECK(f == static_cast<double>(count) / 57.0);
      sum += f;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("class frequency of a single-label dataset") {
  SensorRecord a;
  SensorRecord b;
  b.timestamp = 1;
  const Dataset ds({"lying", "running"}, {a, b});
  CHECK(class_frequency(ds, "lying") == 1.0);
  CHECK(class_frequency(ds, "running") == 0.0);
  CHECK_THROWS_AS(class_frequency(ds, "flying"), LabelError);
}

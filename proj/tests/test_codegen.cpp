#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "tagsense/cart.hpp"
#include "tagsense/codegen.hpp"
#include "tagsense/error.hpp"
#include "tagsense/synth.hpp"
#include "tagsense/textio.hpp"

using namespace tagsense;

namespace {

FeatureMatrix four_rows() {
  FeatureMatrix fm;
  fm.behaviours = {"A", "B"};
  const double xs[] = {1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) {
    FeatureVector r;
    r.values[index(FeatureId::AX)] = xs[i];
    r.label = i < 2 ? 0 : 1;
    r.timestamp = i;
    fm.rows.push_back(r);
  }
  return fm;
}

TreeModel four_row_model() {
  TrainConfig cfg;
  cfg.max_depth = 1;
  cfg.mask = FeatureMask::of({FeatureId::AX});
  return fit(four_rows(), cfg);
}

const TreeModel& deep_model() {
  static const TreeModel m = [] {
    TrainConfig cfg;
    cfg.max_depth = 14;
    return fit(featurize(synthesize(preset("paper-ea60"))), cfg);
  }();
  return m;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

// Reads only the "nodes" block of the portable model text and walks it.
struct TextTree {
  struct Node {
    bool leaf;
    std::size_t feature;
    double threshold;
    std::size_t left, right, cls;
  };
  std::vector<Node> nodes;

  explicit TextTree(const std::string& text) {
    const auto all = textio::lines(text);
    std::size_t i = 0;
    while (!all[i].starts_with("nodes ")) ++i;
    const auto n = static_cast<std::size_t>(*textio::parse_int(textio::split(all[i], ' ')[1]));
    for (std::size_t k = 0; k < n; ++k) {
      const auto tok = textio::split(all[i + 1 + k], ' ');
      Node node{};
      if (tok[0] == "leaf") {
        node.leaf = true;
        node.cls = static_cast<std::size_t>(*textio::parse_int(tok[1]));
      } else {
        node.feature = index(*parse_feature(tok[1]));
        node.threshold = *textio::parse_double(tok[2]);
      }
      nodes.push_back(node);
    }
    // Preorder: left child follows its parent, right child follows the left subtree.
    std::size_t next = 0;
    link(next);
  }

  std::size_t link(std::size_t& next) {
    const std::size_t self = next++;
    if (!nodes[self].leaf) {
      nodes[self].left = link(next);
      nodes[self].right = link(next);
    }
    return self;
  }

  std::size_t run(const FeatureValues& v) const {
    std::size_t i = 0;
    while (!nodes[i].leaf) i = v[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
    return nodes[i].cls;
  }
};

std::string c_literal(std::string text) {
  if (text.find_first_of(".e") == std::string::npos) text += ".0";
  return text;
}

}  // namespace

TEST_CASE("single leaf emits one return") {
  const TreeModel leaf({LeafNode{2, {0, 0, 5}}}, 3, FeatureMask::of({FeatureId::AX, FeatureId::GZ}),
                       {"a", "b", "c"});
  const auto ec = emit_header(leaf);
  CHECK(ec.worst_case_comparisons == 0);
  CHECK(count(ec.source, "if (") == 0);
  CHECK(ec.source.find("  return 2;\n") != std::string::npos);
  CHECK(ec.source.find("static inline int classify_behaviour(float ax, float gz)") != std::string::npos);

  const auto vs = eval_vectors(leaf, 1, 0);
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].expected == 2);
  CHECK(vs[0].args.size() == 2);
  const EmittedInterpreter interp(ec.source, ec.symbol);
  CHECK(interp.arity() == 2);
  CHECK(interp.run(vs[0].args) == 2);
}

TEST_CASE("four-row tree emits one conditional at 2.5") {
  const auto m = four_row_model();
  for (const auto type : {ValueType::Float, ValueType::Double}) {
    CodegenOptions opts;
    opts.value_type = type;
    const auto ec = emit_header(m, opts);
    CHECK(count(ec.source, "if (") == 1);
    CHECK(ec.source.find(type == ValueType::Float ? "if (ax <= 2.5f)" : "if (ax <= 2.5)") != std::string::npos);
    CHECK(ec.worst_case_comparisons == 1);
    CHECK(ec.features == std::vector<FeatureId>{FeatureId::AX});
  }
  CodegenOptions opts;
  opts.value_type = ValueType::Int16Scaled;
  const auto ec = emit_header(m, opts);
  // Range max 4 gives scale 2^12; floor(2.5 * 4096) = 10240.
  CHECK(ec.scales[index(FeatureId::AX)] == 4096.0);
  CHECK(ec.source.find("if (ax <= 10240)") != std::string::npos);
  CHECK(ec.source.find("short ax") != std::string::npos);
}

TEST_CASE("header metadata") {
  const auto& m = deep_model();
  const auto ec = emit_header(m);
  CHECK(ec.worst_case_comparisons == m.depth());
  CHECK(m.depth() <= 14);
  CHECK(ec.fingerprint == "sha256:" + textio::sha256_hex(serialize(m)));
  CHECK(ec.fingerprint.size() == 7 + 64);
  CHECK(ec.source.find("model fingerprint: " + ec.fingerprint) != std::string::npos);
  CHECK(ec.source.find("worst-case comparisons: " + std::to_string(m.depth())) != std::string::npos);
  CHECK(ec.source.find("0=lying 1=sitting 2=standing 3=walking 4=running") != std::string::npos);
  CHECK(ec.source.find("#ifndef TAGSENSE_CLASSIFY_BEHAVIOUR_H") != std::string::npos);
  CHECK(ec.source.find("#include") == std::string::npos);
  CHECK(count(ec.source, "if (") == m.nodes().size() - m.leaf_count());
  CHECK(emit_header(m).source == ec.source);
}

TEST_CASE("symbols must be C identifiers") {
  const auto m = four_row_model();
  for (const auto* bad : {"", "9lives", "has space", "int", "a-b"}) {
    CodegenOptions opts;
    opts.symbol = bad;
    CHECK_THROWS_AS(emit_header(m, opts), ConfigError);
  }
  CodegenOptions opts;
  opts.symbol = "cow_state_v2";
  CHECK(emit_header(m, opts).source.find("static inline int cow_state_v2(") != std::string::npos);
}

TEST_CASE("boundary vectors follow the <= rule") {
  const auto m = four_row_model();
  const auto vs = eval_vectors(m, 10, 3, ValueType::Double);
  bool at = false, below = false, above = false;
  for (const auto& v : vs) {
    if (!v.boundary) continue;
    const double x = v.values[index(FeatureId::AX)];
    if (x == 2.5) {
      at = true;
      CHECK(v.expected == 0);
    } else if (x == std::nextafter(2.5, 0.0)) {
      below = true;
      CHECK(v.expected == 0);
    } else if (x == std::nextafter(2.5, 10.0)) {
      above = true;
      CHECK(v.expected == 1);
    }
  }
  CHECK(at);
  CHECK(below);
  CHECK(above);
}

TEST_CASE("vectors are deterministic and cover every split") {
  const auto& m = deep_model();
  const auto a = eval_vectors(m, 500, 9);
  const auto b = eval_vectors(m, 500, 9);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].values == b[i].values);
    CHECK(a[i].expected == b[i].expected);
  }
  std::size_t boundary = 0;
  for (const auto& v : a) boundary += v.boundary;
  CHECK(a.size() - boundary == 500);
  CHECK(boundary >= m.nodes().size() - m.leaf_count());
  CHECK(eval_vectors(m, 500, 10)[0].values != a[0].values);
}

TEST_CASE("expected classes match an interpreter of the model text") {
  const auto& m = deep_model();
  const TextTree tree(serialize(m));
  for (const auto type : {ValueType::Float, ValueType::Double, ValueType::Int16Scaled}) {
    for (const auto& v : eval_vectors(m, 2000, 5, type)) REQUIRE(tree.run(v.values) == v.expected);
  }
}

TEST_CASE("emitted structure agrees with predict") {
  const auto& m = deep_model();
  for (const auto type : {ValueType::Float, ValueType::Double, ValueType::Int16Scaled}) {
    CAPTURE(value_type_name(type));
    CodegenOptions opts;
    opts.value_type = type;
    const auto ec = emit_header(m, opts);
    const EmittedInterpreter interp(ec.source, ec.symbol);
    CHECK(interp.arity() == 8);
    std::size_t mismatches = 0;
    const auto vs = eval_vectors(m, 10000, 6, type);
    for (const auto& v : vs) mismatches += interp.run(v.args) != v.expected;
    CHECK(mismatches == 0);
  }
}

TEST_CASE("interpreter detects a corrupted threshold") {
  const auto m = four_row_model();
  auto ec = emit_header(m);
  const auto pos = ec.source.find("2.5f");
  REQUIRE(pos != std::string::npos);
  ec.source.replace(pos, 4, "3.5f");
  const EmittedInterpreter interp(ec.source, ec.symbol);
  std::size_t mismatches = 0;
  for (const auto& v : eval_vectors(m, 100, 1)) mismatches += interp.run(v.args) != v.expected;
  CHECK(mismatches >= 1);
  CHECK_THROWS_AS(EmittedInterpreter(ec.source, "other_symbol"), FormatError);
}

TEST_CASE("vectors csv") {
  const auto m = four_row_model();
  const auto vs = eval_vectors(m, 3, 2);
  const auto csv = vectors_csv(m, vs);
  const auto rows = textio::lines(csv);
  CHECK(rows[0] == "AX,expected_class");
  CHECK(rows.size() >= vs.size() + 1);
  for (std::size_t i = 0; i < vs.size(); ++i) {
    const auto cells = textio::split(rows[i + 1], ',');
    REQUIRE(cells.size() == 2);
    CHECK(*textio::parse_float(cells[0]) == static_cast<float>(vs[i].args[0]));
    CHECK(*textio::parse_int(cells[1]) == static_cast<long long>(vs[i].expected));
  }
  const auto full = vectors_csv(deep_model(), eval_vectors(deep_model(), 2, 2));
  CHECK(textio::lines(full)[0] == "AX,AY,AZ,VEDBA,GX,GY,GZ,GVEDBA,expected_class");
}

TEST_CASE("emitted header compiles as C and agrees with predict") {
  if (std::system("cc --version > /dev/null 2>&1") != 0) {
    MESSAGE("no C compiler available, skipping");
    return;
  }
  const auto dir = std::filesystem::temp_directory_path() / "tagsense_codegen_c";
  std::filesystem::create_directories(dir);
  const auto& m = deep_model();
  for (const auto type : {ValueType::Float, ValueType::Double, ValueType::Int16Scaled}) {
    CAPTURE(value_type_name(type));
    CodegenOptions opts;
    opts.value_type = type;
    const auto ec = emit_header(m, opts);
    textio::write_file_atomic(dir / "clf.h", ec.source);
    const auto vs = eval_vectors(m, 300, 8, type);
    std::string c = "#include \"clf.h\"\nstatic const int expected[] = {";
    for (const auto& v : vs) c += std::to_string(v.expected) + ",";
    c += "};\nint main(void)\n{\n  int bad = 0;\n";
    for (const auto& v : vs) {
      c += "  bad += classify_behaviour(";
      for (std::size_t i = 0; i < v.args.size(); ++i) {
        c += i ? ", " : "";
        switch (type) {
          case ValueType::Float:
            c += c_literal(textio::format_shortest(static_cast<float>(v.args[i]))) + "f";
            break;
          case ValueType::Double:
            c += c_literal(textio::format_shortest(v.args[i]));
            break;
          case ValueType::Int16Scaled:
            c += "(short)" + std::to_string(static_cast<long long>(v.args[i]));
            break;
        }
      }
      c += ") != expected[" + std::to_string(&v - vs.data()) + "];\n";
    }
    c += "  return bad != 0;\n}\n";
    textio::write_file_atomic(dir / "main.c", c);
    const auto bin = dir / "main";
    const std::string cmd = "cc -std=c99 -Wall -Wextra -Werror -O0 -o " + bin.string() + " " +
                            (dir / "main.c").string() + " > " + (dir / "cc.log").string() + " 2>&1";
    REQUIRE(std::system(cmd.c_str()) == 0);
    CHECK(std::system(bin.string().c_str()) == 0);
  }
  std::filesystem::remove_all(dir);
}

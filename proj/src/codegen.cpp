#include "tagsense/codegen.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "tagsense/error.hpp"
#include "tagsense/rng.hpp"
#include "tagsense/textio.hpp"

namespace tagsense {

namespace {

constexpr double kInt16Min = -32768.0;
constexpr double kInt16Max = 32767.0;

const std::set<std::string_view> kCKeywords = {
    "auto",     "break",   "case",     "char",   "const",    "continue", "default",
    "do",       "double",  "else",     "enum",   "extern",   "float",    "for",
    "goto",     "if",      "inline",   "int",    "long",     "register", "restrict",
    "return",   "short",   "signed",   "sizeof", "static",   "struct",   "switch",
    "typedef",  "union",   "unsigned", "void",   "volatile", "while",    "_Bool"};

bool valid_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front()))) return false;
  if (!std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
      })) {
    return false;
  }
  return !kCKeywords.contains(s);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Largest float not above x.
float float_down(double x) {
  float f = static_cast<float>(x);
  if (static_cast<double>(f) > x) f = std::nextafter(f, -std::numeric_limits<float>::infinity());
  return f;
}

std::string c_real_literal(std::string text) {
  if (text.find_first_of(".e") == std::string::npos) text += ".0";
  return text;
}

// Threshold literal such that `arg <= literal` in the argument type holds
// exactly when the represented value is <= the model threshold.
std::string threshold_literal(double t, ValueType type, double scale) {
  switch (type) {
    case ValueType::Double:
      return c_real_literal(textio::format_shortest(t));
    case ValueType::Float:
      return c_real_literal(textio::format_shortest(float_down(t))) + "f";
    case ValueType::Int16Scaled:
      return std::to_string(static_cast<long long>(std::floor(t * scale)));
  }
  return {};
}

std::string_view c_type(ValueType t) {
  switch (t) {
    case ValueType::Float:
      return "float";
    case ValueType::Double:
      return "double";
    case ValueType::Int16Scaled:
      return "short";
  }
  return "float";
}

}  // namespace

std::string_view value_type_name(ValueType t) {
  switch (t) {
    case ValueType::Float:
      return "float";
    case ValueType::Double:
      return "double";
    case ValueType::Int16Scaled:
      return "int16";
  }
  return "float";
}

std::optional<ValueType> parse_value_type(std::string_view name) {
  if (name == "float") return ValueType::Float;
  if (name == "double") return ValueType::Double;
  if (name == "int16") return ValueType::Int16Scaled;
  return std::nullopt;
}

std::string model_fingerprint(const TreeModel& m) {
  return "sha256:" + textio::sha256_hex(serialize(m));
}

std::array<double, kFeatureCount> int16_scales(const TreeModel& m) {
  std::array<double, kFeatureCount> max_abs{};
  for (const auto f : m.mask().features()) {
    if (const auto& r = m.meta().ranges[index(f)]) {
      max_abs[index(f)] = std::max(std::abs(r->min), std::abs(r->max));
    }
  }
  for (const auto& node : m.nodes()) {
    if (const auto* in = std::get_if<InternalNode>(&node)) {
      auto& a = max_abs[index(in->feature)];
      a = std::max(a, std::abs(in->threshold));
    }
  }
  std::array<double, kFeatureCount> scales{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    int exponent = 0;
    if (max_abs[i] > 0.0) {
      exponent = static_cast<int>(std::floor(std::log2(kInt16Max / max_abs[i])));
      // log2 rounding can overshoot by one step.
      while (exponent > -60 && max_abs[i] * std::ldexp(1.0, exponent) > kInt16Max) --exponent;
    }
    scales[i] = std::ldexp(1.0, std::clamp(exponent, -60, 60));
  }
  return scales;
}

EmittedClassifier emit_header(const TreeModel& m, const CodegenOptions& opts) {
  if (!valid_identifier(opts.symbol)) {
    throw ConfigError("'" + opts.symbol + "' is not a valid C identifier");
  }
  EmittedClassifier ec;
  ec.symbol = opts.symbol;
  ec.value_type = opts.value_type;
  ec.features = m.mask().features();
  ec.worst_case_comparisons = m.depth();
  ec.fingerprint = model_fingerprint(m);
  ec.scales.fill(1.0);
  if (opts.value_type == ValueType::Int16Scaled) ec.scales = int16_scales(m);

  const auto& names = m.behaviours();
  std::string s;
  s += "/*\n * Behaviour classifier generated by tagsense.\n *\n * behaviours:";
  for (std::size_t i = 0; i < names.size(); ++i) s += " " + std::to_string(i) + "=" + names[i];
  s += "\n * arguments: ";
  for (std::size_t i = 0; i < ec.features.size(); ++i) {
    s += (i ? ", " : "") + std::string(feature_name(ec.features[i]));
  }
  s += "\n * value type: " + std::string(value_type_name(opts.value_type)) + "\n";
  if (opts.value_type == ValueType::Int16Scaled) {
    s += " * fixed point: argument = floor(value * scale), saturated to [-32768, 32767]\n";
    for (const auto f : ec.features) {
      s += " *   " + std::string(feature_name(f)) + " scale " +
           textio::format_shortest(ec.scales[index(f)]) + "\n";
    }
  }
  s += " * max depth: " + std::to_string(m.max_depth()) + "\n";
  s += " * tree depth: " + std::to_string(m.depth()) + "\n";
  s += " * worst-case comparisons: " + std::to_string(ec.worst_case_comparisons) + "\n";
  s += " * model fingerprint: " + ec.fingerprint + "\n";
  s += " *\n * Returns the behaviour index. Values <= threshold take the first branch.\n */\n";

  const auto guard = "TAGSENSE_" + upper(opts.symbol) + "_H";
  s += "#ifndef " + guard + "\n#define " + guard + "\n\n";
  s += "#define " + upper(opts.symbol) + "_N_BEHAVIOURS " + std::to_string(names.size()) + "\n\n";

  s += "static inline const char *" + opts.symbol + "_name(int cls)\n{\n";
  s += "  static const char *const names[" + std::to_string(names.size()) + "] = {";
  for (std::size_t i = 0; i < names.size(); ++i) s += (i ? ", \"" : "\"") + names[i] + "\"";
  s += "};\n  return (cls >= 0 && cls < " + std::to_string(names.size()) +
       ") ? names[cls] : \"\";\n}\n\n";

  s += "static inline int " + opts.symbol + "(";
  for (std::size_t i = 0; i < ec.features.size(); ++i) {
    s += (i ? ", " : "") + std::string(c_type(opts.value_type)) + " " +
         lower(feature_name(ec.features[i]));
  }
  s += ")\n{\n";

  std::function<void(std::size_t, int)> emit = [&](std::size_t i, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    if (const auto* in = std::get_if<InternalNode>(&m.node(i))) {
      s += pad + "if (" + lower(feature_name(in->feature)) + " <= " +
           threshold_literal(in->threshold, opts.value_type, ec.scales[index(in->feature)]) + ") {\n";
      emit(in->left, indent + 1);
      s += pad + "} else {\n";
      emit(in->right, indent + 1);
      s += pad + "}\n";
    } else {
      s += pad + "return " + std::to_string(std::get<LeafNode>(m.node(i)).cls) + ";\n";
    }
  };
  emit(0, 1);
  s += "}\n\n#endif\n";
  ec.source = std::move(s);
  return ec;
}

ValueGrid::ValueGrid(ValueType type, double scale) : type_(type), scale_(scale) {}

double ValueGrid::down(double x) const {
  switch (type_) {
    case ValueType::Double:
      return x;
    case ValueType::Float:
      return static_cast<double>(float_down(x));
    case ValueType::Int16Scaled:
      return std::clamp(std::floor(x * scale_), kInt16Min, kInt16Max) / scale_;
  }
  return x;
}

double ValueGrid::next_up(double v) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (type_) {
    case ValueType::Double:
      return std::nextafter(v, inf);
    case ValueType::Float:
      return static_cast<double>(
          std::nextafter(static_cast<float>(v), std::numeric_limits<float>::infinity()));
    case ValueType::Int16Scaled:
      return std::min(v * scale_ + 1.0, kInt16Max) / scale_;
  }
  return v;
}

double ValueGrid::next_down(double v) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (type_) {
    case ValueType::Double:
      return std::nextafter(v, -inf);
    case ValueType::Float:
      return static_cast<double>(
          std::nextafter(static_cast<float>(v), -std::numeric_limits<float>::infinity()));
    case ValueType::Int16Scaled:
      return std::max(v * scale_ - 1.0, kInt16Min) / scale_;
  }
  return v;
}

double ValueGrid::to_arg(double v) const {
  return type_ == ValueType::Int16Scaled ? v * scale_ : v;
}

std::vector<TestVector> eval_vectors(const TreeModel& m, std::size_t n, std::uint64_t seed,
                                     ValueType type) {
  const auto features = m.mask().features();
  std::array<double, kFeatureCount> scales{};
  scales.fill(1.0);
  if (type == ValueType::Int16Scaled) scales = int16_scales(m);

  std::vector<ValueGrid> grids;
  grids.reserve(kFeatureCount);
  for (std::size_t i = 0; i < kFeatureCount; ++i) grids.emplace_back(type, scales[i]);

  // Sampling range per feature: training range, widened to cover thresholds.
  std::array<FeatureRange, kFeatureCount> span{};
  for (const auto f : features) {
    const auto i = index(f);
    bool have = false;
    if (const auto& r = m.meta().ranges[i]) {
      span[i] = *r;
      have = true;
    }
    for (const auto& node : m.nodes()) {
      const auto* in = std::get_if<InternalNode>(&node);
      if (!in || in->feature != f) continue;
      if (!have) span[i] = {in->threshold, in->threshold};
      have = true;
      span[i].min = std::min(span[i].min, in->threshold);
      span[i].max = std::max(span[i].max, in->threshold);
    }
    if (!have) span[i] = {-1.0, 1.0};
    if (span[i].min == span[i].max) {
      span[i].min -= 1.0;
      span[i].max += 1.0;
    }
  }

  auto finish = [&](TestVector& v) {
    v.args.clear();
    for (const auto f : features) v.args.push_back(grids[index(f)].to_arg(v.values[index(f)]));
    v.expected = predict(m, v.values);
  };

  std::vector<TestVector> out;
  Rng rng(seed);
  for (std::size_t k = 0; k < n; ++k) {
    TestVector v;
    for (const auto f : features) {
      const auto i = index(f);
      v.values[i] = grids[i].down(rng.uniform(span[i].min, span[i].max));
    }
    finish(v);
    out.push_back(std::move(v));
  }

  // Boundary vectors. Intervals are (lo, hi] per feature along the path.
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::array<double, kFeatureCount> lo{};
  std::array<double, kFeatureCount> hi{};
  lo.fill(-inf);
  hi.fill(inf);
  auto inside = [&](std::size_t i, double v) { return v > lo[i] && v <= hi[i]; };
  auto representative = [&](std::size_t i) -> std::optional<double> {
    const auto& g = grids[i];
    const double mid = g.down(0.5 * (span[i].min + span[i].max));
    for (const double c : {mid, g.down(hi[i]), g.next_up(g.down(lo[i]))}) {
      if (std::isfinite(c) && inside(i, c)) return c;
    }
    return std::nullopt;
  };

  std::function<void(std::size_t)> walk = [&](std::size_t node) {
    const auto* in = std::get_if<InternalNode>(&m.node(node));
    if (!in) return;
    const auto fi = index(in->feature);
    FeatureValues base{};
    bool reachable = true;
    for (const auto f : features) {
      const auto r = representative(index(f));
      if (!r) {
        reachable = false;
        break;
      }
      base[index(f)] = *r;
    }
    if (reachable) {
      const auto& g = grids[fi];
      const double at = g.down(in->threshold);
      for (const double c : {g.next_down(at), at, g.next_up(at)}) {
        if (!inside(fi, c)) continue;
        TestVector v;
        v.values = base;
        v.values[fi] = c;
        v.boundary = true;
        finish(v);
        out.push_back(std::move(v));
      }
    }
    const double saved_hi = hi[fi];
    hi[fi] = std::min(hi[fi], in->threshold);
    walk(in->left);
    hi[fi] = saved_hi;
    const double saved_lo = lo[fi];
    lo[fi] = std::max(lo[fi], in->threshold);
    walk(in->right);
    lo[fi] = saved_lo;
  };
  walk(0);
  return out;
}

std::string vectors_csv(const TreeModel& m, std::span<const TestVector> vectors, ValueType type) {
  std::string out;
  for (const auto f : m.mask().features()) out += std::string(feature_name(f)) + ",";
  out += "expected_class\n";
  for (const auto& v : vectors) {
    for (const double a : v.args) {
      switch (type) {
        case ValueType::Double:
          out += textio::format_shortest(a);
          break;
        case ValueType::Float:
          out += textio::format_shortest(static_cast<float>(a));
          break;
        case ValueType::Int16Scaled:
          out += std::to_string(static_cast<long long>(a));
          break;
      }
      out += ",";
    }
    out += std::to_string(v.expected) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Interpreter for the emitted subset:
//   stmt := "return" INT ";"
//         | "if" "(" IDENT "<=" NUMBER ")" "{" stmt "}" "else" "{" stmt "}"

struct EmittedInterpreter::Impl {
  struct Node {
    bool leaf{false};
    std::size_t cls{0};
    std::size_t arg{0};
    double real_threshold{0.0};
    float float_threshold{0.0F};
    long long int_threshold{0};
    std::size_t left{0};
    std::size_t right{0};
  };

  ValueType type{ValueType::Float};
  std::vector<std::string> params;
  std::vector<Node> nodes;
};

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::string next() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (src_.substr(pos_, 2) == "/*") {
        const auto end = src_.find("*/", pos_ + 2);
        pos_ = end == std::string_view::npos ? src_.size() : end + 2;
      } else {
        break;
      }
    }
    if (pos_ >= src_.size()) return {};
    const char c = src_[pos_];
    if (src_.substr(pos_, 2) == "<=") {
      pos_ += 2;
      return "<=";
    }
    const bool number_start =
        std::isdigit(static_cast<unsigned char>(c)) ||
        ((c == '-' || c == '.') && pos_ + 1 < src_.size() &&
         (std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '.'));
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || number_start) {
      const auto start = pos_++;
      while (pos_ < src_.size()) {
        const char d = src_[pos_];
        const bool exp_sign = (d == '-' || d == '+') && number_start &&
                              (src_[pos_ - 1] == 'e' || src_[pos_ - 1] == 'E');
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.' || exp_sign) {
          ++pos_;
        } else {
          break;
        }
      }
      return std::string(src_.substr(start, pos_ - start));
    }
    ++pos_;
    return std::string(1, c);
  }

 private:
  std::string_view src_;
  std::size_t pos_{0};
};

}  // namespace

EmittedInterpreter::EmittedInterpreter(std::string_view source, std::string_view symbol)
    : impl_(std::make_unique<Impl>()) {
  const std::string signature = "int " + std::string(symbol) + "(";
  const auto at = source.find(signature);
  if (at == std::string_view::npos) {
    throw FormatError("emitted source does not define '" + std::string(symbol) + "'");
  }
  Lexer lex(source.substr(at + signature.size()));
  auto expect = [&](std::string_view tok) {
    const auto t = lex.next();
    if (t != tok) throw FormatError("emitted source: expected '" + std::string(tok) + "', got '" + t + "'");
  };

  std::optional<ValueType> type;
  for (auto t = lex.next(); t != ")"; t = lex.next()) {
    if (t == ",") continue;
    const auto declared = t == "short" ? std::optional(ValueType::Int16Scaled)
                          : t == "float" ? std::optional(ValueType::Float)
                          : t == "double" ? std::optional(ValueType::Double)
                                          : std::nullopt;
    if (!declared) throw FormatError("emitted source: unsupported parameter type '" + t + "'");
    if (type && *type != *declared) throw FormatError("emitted source: mixed parameter types");
    type = declared;
    const auto name = lex.next();
    if (name.empty() || !valid_identifier(name)) throw FormatError("emitted source: bad parameter name");
    impl_->params.push_back(name);
  }
  impl_->type = type.value_or(ValueType::Float);
  expect("{");

  auto& nodes = impl_->nodes;
  std::function<std::size_t()> stmt = [&]() -> std::size_t {
    const auto t = lex.next();
    const std::size_t self = nodes.size();
    nodes.emplace_back();
    if (t == "return") {
      const auto v = textio::parse_int(lex.next());
      if (!v || *v < 0) throw FormatError("emitted source: bad return value");
      nodes[self].leaf = true;
      nodes[self].cls = static_cast<std::size_t>(*v);
      expect(";");
      return self;
    }
    if (t != "if") throw FormatError("emitted source: unexpected token '" + t + "'");
    expect("(");
    const auto name = lex.next();
    const auto p = std::find(impl_->params.begin(), impl_->params.end(), name);
    if (p == impl_->params.end()) throw FormatError("emitted source: unknown variable '" + name + "'");
    nodes[self].arg = static_cast<std::size_t>(p - impl_->params.begin());
    expect("<=");
    auto literal = lex.next();
    if (impl_->type == ValueType::Int16Scaled) {
      const auto v = textio::parse_int(literal);
      if (!v) throw FormatError("emitted source: bad integer literal '" + literal + "'");
      nodes[self].int_threshold = *v;
    } else if (impl_->type == ValueType::Float) {
      if (literal.empty() || literal.back() != 'f') throw FormatError("emitted source: float literal without suffix");
      literal.pop_back();
      const auto v = textio::parse_float(literal);
      if (!v) throw FormatError("emitted source: bad float literal '" + literal + "'");
      nodes[self].float_threshold = *v;
    } else {
      const auto v = textio::parse_double(literal);
      if (!v) throw FormatError("emitted source: bad double literal '" + literal + "'");
      nodes[self].real_threshold = *v;
    }
    expect(")");
    expect("{");
    const auto l = stmt();
    expect("}");
    expect("else");
    expect("{");
    const auto r = stmt();
    expect("}");
    nodes[self].left = l;
    nodes[self].right = r;
    return self;
  };
  stmt();
  expect("}");
}

EmittedInterpreter::~EmittedInterpreter() = default;
EmittedInterpreter::EmittedInterpreter(EmittedInterpreter&&) noexcept = default;
EmittedInterpreter& EmittedInterpreter::operator=(EmittedInterpreter&&) noexcept = default;

std::size_t EmittedInterpreter::arity() const { return impl_->params.size(); }

std::size_t EmittedInterpreter::run(std::span<const double> args) const {
  if (args.size() != impl_->params.size()) {
    throw ShapeError("emitted function takes " + std::to_string(impl_->params.size()) +
                     " arguments, got " + std::to_string(args.size()));
  }
  std::size_t i = 0;
  while (!impl_->nodes[i].leaf) {
    const auto& n = impl_->nodes[i];
    const double a = args[n.arg];
    bool left = false;
    switch (impl_->type) {
      case ValueType::Float:
        left = static_cast<float>(a) <= n.float_threshold;
        break;
      case ValueType::Double:
        left = a <= n.real_threshold;
        break;
      case ValueType::Int16Scaled:
        left = static_cast<long long>(static_cast<short>(a)) <= n.int_threshold;
        break;
    }
    i = left ? n.left : n.right;
  }
  return impl_->nodes[i].cls;
}

}  // namespace tagsense

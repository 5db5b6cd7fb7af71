#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tagsense/cart.hpp"

namespace tagsense {

// Argument type of the emitted function. Int16Scaled passes each feature as
// a `short` holding round-down(value * scale), scale being a per-feature
// power of two chosen so the training range fits.
enum class ValueType { Float, Double, Int16Scaled };

std::string_view value_type_name(ValueType t);
std::optional<ValueType> parse_value_type(std::string_view name);

struct CodegenOptions {
  std::string symbol{"classify_behaviour"};
  ValueType value_type{ValueType::Float};
};

struct EmittedClassifier {
  std::string source;
  std::string symbol;
  ValueType value_type{ValueType::Float};
  std::vector<FeatureId> features;  // argument order
  int worst_case_comparisons{0};
  std::string fingerprint;           // "sha256:<hex>" of the portable model text
  std::array<double, kFeatureCount> scales{};  // 1 unless Int16Scaled
};

// "sha256:<hex>" of serialize(m).
std::string model_fingerprint(const TreeModel& m);

// Per-feature fixed-point scales used by Int16Scaled (1.0 for unmasked features).
std::array<double, kFeatureCount> int16_scales(const TreeModel& m);

// Freestanding C header: one pure function returning the class index, as
// nested if/else mirroring the tree. Throws ConfigError for a symbol that is
// not a valid C identifier.
EmittedClassifier emit_header(const TreeModel& m, const CodegenOptions& opts = {});

// Maps real feature values onto the values a given argument type can hold.
class ValueGrid {
 public:
  ValueGrid(ValueType type, double scale);

  // Largest representable value <= x (saturating for Int16Scaled).
  double down(double x) const;
  double next_up(double v) const;
  double next_down(double v) const;
  // The argument the emitted function receives for representable value v.
  double to_arg(double v) const;

 private:
  ValueType type_;
  double scale_;
};

struct TestVector {
  FeatureValues values{};     // representable reals, 0 for unmasked features
  std::vector<double> args;   // emitted-function arguments, in argument order
  std::size_t expected{0};    // predict() on `values`
  bool boundary{false};
};

// `n` random vectors over the training ranges followed by boundary vectors:
// for every internal node, points reaching it at the threshold and one grid
// step either side. Expected classes come from predict(). Deterministic
// under `seed`.
std::vector<TestVector> eval_vectors(const TreeModel& m, std::size_t n, std::uint64_t seed,
                                     ValueType type = ValueType::Float);

// CSV: one column per argument (feature names), then expected_class.
std::string vectors_csv(const TreeModel& m, std::span<const TestVector> vectors,
                        ValueType type = ValueType::Float);

// Executes the conditional structure of an emitted function directly from
// its source text, comparing in the argument type it declares.
class EmittedInterpreter {
 public:
  // Throws FormatError if `symbol` is absent or the body is outside the
  // emitted subset.
  EmittedInterpreter(std::string_view source, std::string_view symbol);
  ~EmittedInterpreter();
  EmittedInterpreter(EmittedInterpreter&&) noexcept;
  EmittedInterpreter& operator=(EmittedInterpreter&&) noexcept;

  std::size_t arity() const;
  std::size_t run(std::span<const double> args) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tagsense

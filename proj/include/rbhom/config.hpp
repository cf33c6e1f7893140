#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rbhom/macro.hpp"
#include "rbhom/parametrization.hpp"

namespace rbhom {

struct RunConfig {
  int n_per_side = 12;
  double delta = 0.1;
  double theta0 = 0.99;
  std::size_t p = 50;
  std::size_t n_max = 40;
  double rel_tol = 1e-8;
  std::uint64_t seed = 2024;
  double epsilon = 0.02;
  double h_hom = 0.03;
  std::string field = "analytic";  // analytic | centered
  std::string out_dir = "out";
  std::size_t n_rb = 20;           // basis size used by homogenize and bench
  int corrector_resolution = 200;
  int bench_repetitions = 5;

  ParamBox box() const { return {delta, theta0}; }
};

/// Throws ValidationError naming the offending field.
void validate(const RunConfig& config);

/// Applies one key=value assignment. Throws ValidationError on an unknown
/// key or a value that does not parse completely.
void set_field(RunConfig& config, const std::string& key, const std::string& value);

/// Flat key=value text; '#' starts a comment. Not validated.
RunConfig parse_config(const std::string& text);
RunConfig read_config(const std::filesystem::path& path);

/// Canonical key=value lines in declaration order, doubles in round-trip form.
std::vector<std::string> echo_config(const RunConfig& config);

/// Field named by config.field over config.box().
ParamField make_field(const RunConfig& config);

/// Stateless 64-bit generator: the value at (key, counter) is two rounds of
/// the splitmix64 finalizer, so any stream can be replayed from any offset.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}
  std::uint64_t bits(std::uint64_t counter) const noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept;

 private:
  std::uint64_t key_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// count parameters drawn uniformly and independently per coordinate over
/// the box from the stream keyed by `stream`. Parameter k uses counters 5k..5k+4.
std::vector<CellParam> sample_box(const ParamBox& box, std::size_t count, std::uint64_t stream);

inline std::vector<CellParam> training_sample(const RunConfig& c) { return sample_box(c.box(), c.p, c.seed); }
inline std::vector<CellParam> test_sample(const RunConfig& c) { return sample_box(c.box(), c.p, c.seed + 1); }

}  // namespace rbhom

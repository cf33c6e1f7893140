#include "rbhom/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rbhom/errors.hpp"

namespace rbhom {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  if (ec != std::errc() || ptr != end || value.empty()) {
    throw ValidationError("config field '" + key + "': cannot parse '" + value + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& key, const std::string& message) {
  if (!ok) throw ValidationError("config field '" + key + "': " + message);
}

}  // namespace

void validate(const RunConfig& c) {
  require(c.n_per_side >= 4 && c.n_per_side % 4 == 0, "n_per_side", "must be a multiple of 4 and at least 4");
  require(c.delta > 0.0 && c.delta < 0.25, "delta", "must lie in (0, .25)");
  require(c.theta0 >= 0.0 && c.theta0 < 1.0, "theta0", "must lie in [0, 1)");
  require(c.p >= 1, "p", "must be positive");
  require(c.n_max <= 2 * c.p, "n_max", "cannot exceed 2 p");
  require(c.rel_tol >= 0.0, "rel_tol", "must be non-negative");
  require(c.epsilon > 0.0 && c.epsilon < 1.0, "epsilon", "must lie in (0, 1)");
  require(c.h_hom > 0.0 && c.h_hom <= 1.0, "h_hom", "must lie in (0, 1]");
  require(c.field == "analytic" || c.field == "centered", "field", "must be 'analytic' or 'centered'");
  require(!c.out_dir.empty(), "out_dir", "must not be empty");
  require(c.corrector_resolution >= 1, "corrector_resolution", "must be positive");
  require(c.bench_repetitions >= 5, "bench_repetitions", "must be at least 5");
}

void set_field(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "n_per_side") c.n_per_side = parse_number<int>(key, value);
  else if (key == "delta") c.delta = parse_number<double>(key, value);
  else if (key == "theta0") c.theta0 = parse_number<double>(key, value);
  else if (key == "p") c.p = parse_number<std::size_t>(key, value);
  else if (key == "n_max") c.n_max = parse_number<std::size_t>(key, value);
  else if (key == "rel_tol") c.rel_tol = parse_number<double>(key, value);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value);
  else if (key == "epsilon") c.epsilon = parse_number<double>(key, value);
  else if (key == "h_hom") c.h_hom = parse_number<double>(key, value);
  else if (key == "field") c.field = value;
  else if (key == "out_dir") c.out_dir = value;
  else if (key == "n_rb") c.n_rb = parse_number<std::size_t>(key, value);
  else if (key == "corrector_resolution") c.corrector_resolution = parse_number<int>(key, value);
  else if (key == "bench_repetitions") c.bench_repetitions = parse_number<int>(key, value);
  else throw ValidationError("unknown config field '" + key + "'");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(number) + ": expected key=value");
    }
    set_field(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return c;
}

RunConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::vector<std::string> echo_config(const RunConfig& c) {
  return {
      "n_per_side=" + std::to_string(c.n_per_side),
      "delta=" + format_double(c.delta),
      "theta0=" + format_double(c.theta0),
      "p=" + std::to_string(c.p),
      "n_max=" + std::to_string(c.n_max),
      "rel_tol=" + format_double(c.rel_tol),
      "seed=" + std::to_string(c.seed),
      "epsilon=" + format_double(c.epsilon),
      "h_hom=" + format_double(c.h_hom),
      "field=" + c.field,
      "out_dir=" + c.out_dir,
      "n_rb=" + std::to_string(c.n_rb),
      "corrector_resolution=" + std::to_string(c.corrector_resolution),
      "bench_repetitions=" + std::to_string(c.bench_repetitions),
  };
}

ParamField make_field(const RunConfig& c) {
  if (c.field == "centered") {
    return ParamField::uniform(c.box(), CellParam{0.25, 0.75, 0.25, 0.75, -0.5 * c.theta0});
  }
  return ParamField::analytic(c.box());
}

// ---------------------------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t counter) const noexcept {
  return splitmix64(splitmix64(key_) ^ counter);
}

double CounterRng::uniform(std::uint64_t counter) const noexcept {
  return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

std::vector<CellParam> sample_box(const ParamBox& box, std::size_t count, std::uint64_t stream) {
  box.validate();
  const CounterRng rng(stream);
  const CellParam lo = box.lower();
  const CellParam hi = box.upper();
  std::vector<CellParam> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t base = 5 * static_cast<std::uint64_t>(k);
    auto draw = [&](int d, double a, double b) { return a + (b - a) * rng.uniform(base + d); };
    out[k].b1 = draw(0, lo.b1, hi.b1);
    out[k].c1 = draw(1, lo.c1, hi.c1);
    out[k].b2 = draw(2, lo.b2, hi.b2);
    out[k].c2 = draw(3, lo.c2, hi.c2);
    out[k].theta = hi.theta - (hi.theta - lo.theta) * rng.uniform(base + 4);
  }
  return out;
}

}  // namespace rbhom

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rbhom/errors.hpp"
#include "rbhom/harness.hpp"

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericalFailure = 3, kBoundViolation = 4 };

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-basis periodic homogenization"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir;
  std::string basis_path;
  std::string provider = "truth";
  std::vector<std::string> assignments;
  std::map<std::string, std::string> overrides;

  app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--basis", basis_path, "basis container path");
  app.add_option("--provider", provider, "coefficient provider for homogenize")
      ->check(CLI::IsMember({"truth", "rb"}));
  app.add_option("--set", assignments, "override any config field, key=value");
  for (const char* key : {"seed", "n_per_side", "delta", "theta0", "p", "n_max", "rel_tol", "epsilon", "h_hom",
                          "field", "n_rb", "corrector_resolution", "bench_repetitions"}) {
    std::string flag = std::string("--") + key;
    for (auto& ch : flag) if (ch == '_') ch = '-';
    app.add_option(flag, overrides[key], std::string("override ") + key);
  }

  auto* offline = app.add_subcommand("offline", "greedy basis construction and training decay");
  auto* audit = app.add_subcommand("audit", "effectivity and error decay on the test sample");
  auto* homogenize = app.add_subcommand("homogenize", "macroscopic solve with corrector reconstruction");
  auto* bench = app.add_subcommand("bench", "offline and per-query timings");
  auto* convergence = app.add_subcommand("convergence", "mesh refinement of the cell tensor");

  CLI11_PARSE(app, argc, argv);

  try {
    rbhom::RunConfig config = config_path.empty() ? rbhom::RunConfig{} : rbhom::read_config(config_path);
    for (const auto& [key, value] : overrides) {
      if (!value.empty()) rbhom::set_field(config, key, value);
    }
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw rbhom::ValidationError("--set expects key=value, got '" + a + "'");
      rbhom::set_field(config, a.substr(0, eq), a.substr(eq + 1));
    }
    if (!out_dir.empty()) config.out_dir = out_dir;
    rbhom::validate(config);

    if (*offline) rbhom::cmd_offline(config, std::cout);
    if (*audit) rbhom::cmd_audit(config, basis_path, std::cout);
    if (*homogenize) rbhom::cmd_homogenize(config, basis_path, provider, std::cout);
    if (*bench) rbhom::cmd_bench(config, basis_path, std::cout);
    if (*convergence) rbhom::cmd_convergence(config, std::cout);
  } catch (const rbhom::ValidationError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const rbhom::BasisFileError& e) {
    std::cerr << "basis error: " << e.what() << '\n';
    return kConfigError;
  } catch (const rbhom::BoundViolation& e) {
    std::cerr << "bound violation: " << e.what() << '\n';
    return kBoundViolation;
  } catch (const rbhom::SolveError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalFailure;
  }
  return kOk;
}

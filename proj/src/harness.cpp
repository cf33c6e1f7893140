#include "rbhom/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>

#include "rbhom/basis_io.hpp"
#include "rbhom/errors.hpp"
#include "rbhom/sweep.hpp"

namespace rbhom {

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
auto staged(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    throw ValidationError(stage + ": " + e.what());
  } catch (const SolveError& e) {
    throw SolveError(stage + ": " + e.detail(), e.residual());
  } catch (const BoundViolation& e) {
    throw BoundViolation(stage + ": " + e.what());
  } catch (const BasisFileError& e) {
    throw BasisFileError(stage + ": " + e.what());
  }
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::filesystem::path prepare_out(const RunConfig& config) {
  std::filesystem::path dir(config.out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path default_basis_path(const RunConfig& config) {
  return std::filesystem::path(config.out_dir) / "basis.rbhom";
}

AffineSystem make_system(const RunConfig& config) {
  return staged("mesh", [&] { return AffineSystem(PeriodicMesh(config.n_per_side)); });
}

}  // namespace

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::string& schema, const RunConfig& config,
                     const std::string& basis_fingerprint, const std::vector<std::string>& columns)
    : out_(path, std::ios::binary | std::ios::trunc), width_(columns.size()) {
  if (!out_) throw ValidationError("cannot write " + path.string());
  out_ << "# schema=" << schema << " version=" << kCsvSchemaVersion << '\n';
  out_ << "# basis=" << basis_fingerprint << '\n';
  for (const auto& line : echo_config(config)) out_ << "# config " << line << '\n';
  for (std::size_t i = 0; i < columns.size(); ++i) columns_ += (i ? "," : "") + columns[i];
}

void CsvWriter::comment(const std::string& line) { out_ << "# " << line << '\n'; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != width_) throw std::logic_error("csv row width does not match its columns");
  if (!started_) {
    out_ << columns_ << '\n';
    started_ = true;
  }
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

// ---------------------------------------------------------------------------

OfflineOutput cmd_offline(const RunConfig& config, std::ostream& log) {
  staged("config", [&] { validate(config); });
  const auto dir = prepare_out(config);
  const AffineSystem system = make_system(config);
  const auto sample = training_sample(config);

  OfflineOutput out;
  out.greedy = staged("greedy", [&] {
    return greedy_build(system, sample, {config.n_max, config.rel_tol, Execution::parallel}, config.box());
  });
  out.basis_path = default_basis_path(config);
  staged("save", [&] { save_basis(out.greedy.basis, out.basis_path); });

  out.decay_csv = dir / "offline_decay.csv";
  CsvWriter csv(out.decay_csv, "offline_decay", config, fingerprint_hex(out.greedy.basis.fingerprint()),
                {"N", "max_rel_bound", "selected_param_id", "selected_dir"});
  for (const auto& notice : out.greedy.basis.notices()) {
    csv.comment("notice " + notice);
    log << "notice: " << notice << '\n';
  }
  for (const auto& step : out.greedy.history) {
    csv.row({std::to_string(step.n), fmt(step.max_rel_bound), std::to_string(step.selected_param),
             std::to_string(step.selected_dir)});
  }
  log << "offline: N=" << out.greedy.basis.size() << " basis written to " << out.basis_path.string() << '\n';
  return out;
}

AuditOutput cmd_audit(const RunConfig& config, const std::filesystem::path& basis_path, std::ostream& log) {
  staged("config", [&] { validate(config); });
  const auto dir = prepare_out(config);
  const AffineSystem system = make_system(config);
  const auto path = basis_path.empty() ? default_basis_path(config) : basis_path;
  const ReducedBasis basis = staged("load", [&] { return load_basis(path, system); });
  const auto sample = test_sample(config);

  AuditOptions options;
  for (std::size_t n = 1; n <= basis.size(); ++n) options.n_values.push_back(n);
  if (options.n_values.empty()) options.n_values.push_back(0);
  options.throw_on_violation = false;

  AuditOutput out;
  out.report = staged("audit", [&] { return effectivity_audit(basis, system, sample, options); });
  const std::string fp = fingerprint_hex(basis.fingerprint());

  out.curves_csv = dir / "audit_curves.csv";
  {
    CsvWriter csv(out.curves_csv, "audit_curves", config, fp,
                  {"N", "max_rel_bound", "max_rel_true_err", "max_rel_output_err", "min_effectivity",
                   "median_effectivity", "max_effectivity", "violations"});
    csv.comment("global_gamma_over_alpha=" + fmt(out.report.global_gamma_over_alpha));
    for (const auto& s : out.report.per_n) {
      csv.row({std::to_string(s.n), fmt(s.max_rel_bound), fmt(s.max_rel_true_err), fmt(s.max_rel_s_err),
               fmt(s.min_effectivity), fmt(s.median_effectivity), fmt(s.max_effectivity),
               std::to_string(s.violations)});
    }
  }

  out.effectivity_csv = dir / "audit_effectivity.csv";
  {
    CsvWriter csv(out.effectivity_csv, "audit_effectivity", config, fp,
                  {"param_id", "b1", "c1", "b2", "c2", "theta", "dir", "true_err", "bound", "effectivity",
                   "s_err", "s_bound"});
    csv.comment("N=" + std::to_string(basis.size()));
    for (const auto& e : out.report.entries) {
      if (e.n != basis.size()) continue;
      csv.row({std::to_string(e.param_id), fmt(e.param.b1), fmt(e.param.c1), fmt(e.param.b2), fmt(e.param.c2),
               fmt(e.param.theta), std::to_string(e.dir + 1), fmt(e.true_err), fmt(e.bound), fmt(e.effectivity),
               fmt(e.s_err), fmt(e.s_bound)});
    }
  }

  if (!out.report.per_n.empty()) {
    const auto& last = out.report.per_n.back();
    log << "audit: N=" << last.n << " effectivity in [" << last.min_effectivity << ", " << last.max_effectivity
        << "], global gamma/alpha " << out.report.global_gamma_over_alpha << '\n';
  }
  if (!out.report.violations.empty()) {
    throw BoundViolation("audit: " + std::to_string(out.report.violations.size()) +
                         " bound violations, first: " + out.report.violations.front());
  }
  return out;
}

HomogenizeOutput cmd_homogenize(const RunConfig& config, const std::filesystem::path& basis_path,
                                const std::string& provider, std::ostream& log) {
  staged("config", [&] {
    validate(config);
    if (provider != "truth" && provider != "rb") throw ValidationError("provider must be 'truth' or 'rb'");
  });
  const auto dir = prepare_out(config);
  const AffineSystem system = make_system(config);
  const ParamField field = make_field(config);
  staged("field", [&] { validate_field(field); });
  const MacroMesh mesh = MacroMesh::with_size(config.h_hom);

  HomogenizeOutput out;
  const TruthProvider truth(system);
  out.truth = staged("macro truth", [&] { return run_homogenized(mesh, field, truth); });
  std::string fp = "none";
  std::size_t n_used = 0;

  std::optional<ReducedBasis> basis;
  std::unique_ptr<RbProvider> rb;
  const CoefficientProvider* chosen = &truth;
  if (provider == "rb") {
    const auto path = basis_path.empty() ? default_basis_path(config) : basis_path;
    basis = staged("load", [&] { return load_basis(path, system); });
    n_used = std::min(config.n_rb, basis->size());
    fp = fingerprint_hex(basis->fingerprint());
    rb = std::make_unique<RbProvider>(*basis, system.mesh(), n_used);
    out.rb = staged("macro rb", [&] { return run_homogenized(mesh, field, *rb); });
    out.comparison = compare_macro(mesh, out.truth.u_star, *out.rb);
    chosen = rb.get();
  }
  const HomogenizedRun& run = out.rb ? *out.rb : out.truth;
  out.corrector = staged("corrector", [&] {
    return reconstruct_corrector(mesh, run.u_star, field, *chosen, config.epsilon, config.corrector_resolution);
  });
  if (out.corrector.under_resolved) {
    log << "warning: corrector grid has fewer than 4 samples per period\n";
  }

  out.summary_csv = dir / ("homogenize_" + provider + ".csv");
  {
    CsvWriter csv(out.summary_csv, "homogenize_summary", config, fp,
                  {"provider", "h_hom", "h_Y", "N", "epsilon", "l2_err", "h1_err", "max_delta_s", "assembly_time",
                   "solve_time", "h1_indicator"});
    auto emit = [&](const HomogenizedRun& r, std::size_t n, const MacroComparison& c) {
      csv.row({r.system.source, fmt(mesh.h()), fmt(1.0 / config.n_per_side), std::to_string(n),
               fmt(config.epsilon), fmt(c.l2_err), fmt(c.h1_err), fmt(r.max_delta_s),
               fmt(r.system.assembly_seconds), fmt(r.solve_seconds), fmt(c.indicator)});
    };
    emit(out.truth, 0, MacroComparison{});
    if (out.rb) emit(*out.rb, n_used, out.comparison);
  }

  out.field_csv = dir / ("fine_field_" + provider + ".csv");
  {
    CsvWriter csv(out.field_csv, "fine_field", config, fp, {"x1", "x2", "u_corrected", "u_star", "grad1", "grad2"});
    if (out.corrector.under_resolved) csv.comment("warning under-resolved corrector grid");
    for (const auto& s : out.corrector.samples) {
      csv.row({fmt(s.x.x1), fmt(s.x.x2), fmt(s.u_corrected), fmt(s.u_star), fmt(s.grad[0]), fmt(s.grad[1])});
    }
  }
  if (out.rb) {
    log << "homogenize: h1_err=" << out.comparison.h1_err << " indicator=" << out.comparison.indicator << '\n';
  }
  return out;
}

QueryTimes time_queries(const AffineSystem& system, const ReducedBasis& basis, std::size_t n_used,
                        const std::vector<CellParam>& params, int repetitions) {
  if (params.empty()) throw ValidationError("time_queries needs at least one parameter");
  std::vector<AffineCoeffs> coeffs;
  for (const auto& p : params) coeffs.push_back(affine_coeffs(p));
  const double count = static_cast<double>(params.size());
  std::vector<double> truth_t, rb_t, bound_t;
  std::vector<OnlineResult> reduced(params.size());
  volatile double sink = 0.0;
  // one untimed warm-up pass
  for (int rep = -1; rep < repetitions; ++rep) {
    auto t0 = Clock::now();
    for (const auto& c : coeffs) sink = sink + solve_cell(system, c).w[0][1];
    auto t1 = Clock::now();
    for (std::size_t k = 0; k < coeffs.size(); ++k) reduced[k] = online_solve(basis, coeffs[k], n_used, false);
    auto t2 = Clock::now();
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
      sink = sink + error_bound(basis, coeffs[k], reduced[k].w).delta_w[0];
    }
    auto t3 = Clock::now();
    if (rep < 0) continue;
    truth_t.push_back(std::chrono::duration<double>(t1 - t0).count() / count);
    rb_t.push_back(std::chrono::duration<double>(t2 - t1).count() / count);
    bound_t.push_back(std::chrono::duration<double>(t3 - t2).count() / count);
  }
  return {median(truth_t), median(rb_t), median(bound_t)};
}

BenchOutput cmd_bench(const RunConfig& config, const std::filesystem::path& basis_path, std::ostream& log) {
  staged("config", [&] { validate(config); });
  const auto dir = prepare_out(config);
  const AffineSystem system = make_system(config);
  const auto sample = training_sample(config);

  BenchOutput out;
  std::vector<double> offline;
  ReducedBasis basis;
  for (int rep = 0; rep < config.bench_repetitions; ++rep) {
    const auto t0 = Clock::now();
    auto result = greedy_build(system, sample, {config.n_max, config.rel_tol, Execution::parallel}, config.box());
    offline.push_back(std::chrono::duration<double>(Clock::now() - t0).count());
    if (rep == 0) basis = std::move(result.basis);
  }
  out.offline_seconds = median(offline);
  if (!basis_path.empty()) basis = staged("load", [&] { return load_basis(basis_path, system); });

  out.n_used = std::min(config.n_rb, basis.size());
  out.truth_dofs = static_cast<std::size_t>(system.dimension());
  out.queries = time_queries(system, basis, out.n_used, test_sample(config), config.bench_repetitions);

  out.csv = dir / "bench.csv";
  CsvWriter csv(out.csv, "bench", config, fingerprint_hex(basis.fingerprint()),
                {"n_per_side", "truth_dofs", "N", "offline_time", "truth_query_time", "rb_query_time",
                 "rb_bound_time", "rb_over_truth", "dof_ratio"});
  csv.row({std::to_string(config.n_per_side), std::to_string(out.truth_dofs), std::to_string(out.n_used),
           fmt(out.offline_seconds), fmt(out.queries.truth), fmt(out.queries.rb_solve), fmt(out.queries.rb_bound),
           fmt(out.queries.rb_solve / out.queries.truth),
           fmt(static_cast<double>(out.n_used) / static_cast<double>(out.truth_dofs))});
  log << "bench: truth " << out.queries.truth << " s/query, rb " << out.queries.rb_solve << " s/query\n";
  return out;
}

Eigen::Matrix2d richardson(const Eigen::Matrix2d& coarse, const Eigen::Matrix2d& fine) {
  return (4.0 * fine - coarse) / 3.0;
}

ConvergenceOutput cmd_convergence(const RunConfig& config, std::ostream& log) {
  staged("config", [&] { validate(config); });
  const auto dir = prepare_out(config);
  const std::vector<int> levels{8, 16, 32, 64};
  const CellParam sampled = training_sample(config).front();

  struct Case {
    std::string label;
    AffineCoeffs coeffs;
  };
  const std::vector<Case> cases{
      {"homogeneous", affine_coeffs(CellParam{})},
      {"laminate", laminate_coeffs(-0.5)},
      {"centered_inclusion", affine_coeffs(CellParam{0.25, 0.75, 0.25, 0.75, -0.5})},
      {"sampled", affine_coeffs(sampled)},
  };

  ConvergenceOutput out;
  for (const auto& c : cases) out.rows.push_back({c.label, levels, {}, {}});
  for (int n : levels) {
    const AffineSystem system = staged("mesh", [&] { return AffineSystem(PeriodicMesh(n)); });
    for (std::size_t k = 0; k < cases.size(); ++k) {
      const auto sol = staged("cell " + cases[k].label, [&] { return solve_cell(system, cases[k].coeffs); });
      out.rows[k].a_star.push_back(homogenized_tensor(sol).a_star);
    }
  }
  for (auto& row : out.rows) {
    row.extrapolated = richardson(row.a_star[row.a_star.size() - 2], row.a_star.back());
  }

  out.csv = dir / "convergence.csv";
  CsvWriter csv(out.csv, "convergence", config, "none", {"case", "n_per_side", "a11", "a12", "a21", "a22"});
  csv.comment("n_per_side=0 rows hold the Richardson limit of the two finest levels");
  for (const auto& row : out.rows) {
    for (std::size_t i = 0; i < row.n_values.size(); ++i) {
      const auto& a = row.a_star[i];
      csv.row({row.label, std::to_string(row.n_values[i]), fmt(a(0, 0)), fmt(a(0, 1)), fmt(a(1, 0)), fmt(a(1, 1))});
    }
    const auto& a = row.extrapolated;
    csv.row({row.label, "0", fmt(a(0, 0)), fmt(a(0, 1)), fmt(a(1, 0)), fmt(a(1, 1))});
  }
  log << "convergence: written " << out.csv.string() << '\n';
  return out;
}

}  // namespace rbhom

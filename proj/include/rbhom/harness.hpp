#pragma once

#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rbhom/config.hpp"
#include "rbhom/macro.hpp"
#include "rbhom/reduced_basis.hpp"

namespace rbhom {

inline constexpr int kCsvSchemaVersion = 1;

/// CSV file with a '#' header block: schema, basis fingerprint, config echo.
/// Comments added before the first row join the header block.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& schema, const RunConfig& config,
            const std::string& basis_fingerprint, const std::vector<std::string>& columns);
  void comment(const std::string& line);
  void row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::string columns_;
  std::size_t width_ = 0;
  bool started_ = false;
};

/// Round-trip formatting used in every CSV cell.
std::string fmt(double v);

struct OfflineOutput {
  GreedyResult greedy;
  std::filesystem::path basis_path;
  std::filesystem::path decay_csv;
};

OfflineOutput cmd_offline(const RunConfig& config, std::ostream& log);

struct AuditOutput {
  AuditReport report;
  std::filesystem::path curves_csv;
  std::filesystem::path effectivity_csv;
};

/// Throws BoundViolation after writing its CSVs if any bound is violated.
AuditOutput cmd_audit(const RunConfig& config, const std::filesystem::path& basis_path, std::ostream& log);

struct HomogenizeOutput {
  HomogenizedRun truth;
  std::optional<HomogenizedRun> rb;
  MacroComparison comparison;
  CorrectorField corrector;
  std::filesystem::path summary_csv;
  std::filesystem::path field_csv;
};

/// provider is "truth" or "rb"; the rb path also runs the truth provider to
/// measure the transported error.
HomogenizeOutput cmd_homogenize(const RunConfig& config, const std::filesystem::path& basis_path,
                                const std::string& provider, std::ostream& log);

struct QueryTimes {
  double truth = 0.0;     // seconds per truth cell solve
  double rb_solve = 0.0;  // seconds per reduced solve without bound
  double rb_bound = 0.0;  // seconds per error bound evaluation
};

/// Median over `repetitions` of the mean per-query time over `params`.
QueryTimes time_queries(const AffineSystem& system, const ReducedBasis& basis, std::size_t n_used,
                        const std::vector<CellParam>& params, int repetitions);

struct BenchOutput {
  double offline_seconds = 0.0;
  QueryTimes queries;
  std::size_t n_used = 0;
  std::size_t truth_dofs = 0;
  std::filesystem::path csv;
};

/// Builds the basis in process when basis_path is empty.
BenchOutput cmd_bench(const RunConfig& config, const std::filesystem::path& basis_path, std::ostream& log);

struct ConvergenceRow {
  std::string label;
  std::vector<int> n_values;
  std::vector<Eigen::Matrix2d> a_star;
  Eigen::Matrix2d extrapolated = Eigen::Matrix2d::Zero();
};

/// Richardson limit from the last two levels assuming second-order convergence.
Eigen::Matrix2d richardson(const Eigen::Matrix2d& coarse, const Eigen::Matrix2d& fine);

struct ConvergenceOutput {
  std::vector<ConvergenceRow> rows;
  std::filesystem::path csv;
};

ConvergenceOutput cmd_convergence(const RunConfig& config, std::ostream& log);

}  // namespace rbhom

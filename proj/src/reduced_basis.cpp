#include "rbhom/reduced_basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include <Eigen/Cholesky>

#include "rbhom/errors.hpp"
#include "rbhom/sweep.hpp"

namespace rbhom {

namespace {

// Whitened columns whose remainder falls below this fraction of their norm
// are already represented by the existing factor.
constexpr double kRieszDropTol = 1e-13;

double seminorm(const AffineSystem& system, const Vector& v) {
  return std::sqrt(std::max(0.0, h1_semi_inner(v, v, system.reference_laplacian())));
}

}  // namespace

ReducedBasis::ReducedBasis(const AffineSystem& system, ParamBox box)
    : n_per_side_(system.mesh().n_per_side()),
      fingerprint_(system.fingerprint()),
      box_(box),
      workspace_q_(system.dimension(), 0),
      extendable_(true) {
  for (int q = 0; q < kAffineTerms; ++q) {
    stiffness_[q].resize(0, 0);
    loads_[q].resize(0, 1);
  }
  for (int k = 0; k < kBlockCount; ++k) {
    for (int d = 0; d < kDirections; ++d) {
      add_riesz_column(system.reference_solver().whiten(system.block_load(k, static_cast<Direction>(d))));
    }
  }
}

void ReducedBasis::add_riesz_column(const Vector& whitened) {
  const Eigen::Index rows = workspace_q_.cols();
  const Eigen::Index col = riesz_factor_.cols();
  Vector x = whitened;
  const double xnorm = x.norm();
  Vector t = Vector::Zero(rows);
  if (rows > 0) {
    for (int pass = 0; pass < 2; ++pass) {
      const Vector dt = workspace_q_.transpose() * x;
      x.noalias() -= workspace_q_ * dt;
      t += dt;
    }
  }
  const double r = x.norm();
  const bool grow = xnorm > 0.0 && r > kRieszDropTol * xnorm && rows < workspace_q_.rows();
  const Eigen::Index new_rows = rows + (grow ? 1 : 0);

  riesz_factor_.conservativeResize(new_rows, col + 1);
  if (grow) riesz_factor_.row(rows).setZero();
  riesz_factor_.col(col).setZero();
  riesz_factor_.col(col).head(rows) = t;
  if (grow) {
    riesz_factor_(rows, col) = r;
    workspace_q_.conservativeResize(Eigen::NoChange, rows + 1);
    workspace_q_.col(rows) = x / r;
  }
  rows_upto_.push_back(static_cast<std::size_t>(new_rows));
}

void ReducedBasis::append(const AffineSystem& system, Vector xi, const Selection& origin) {
  if (!extendable_) throw BasisFileError("basis has no offline workspace and cannot be extended");
  if (system.fingerprint() != fingerprint_) throw BasisFileError("system fingerprint mismatch");
  const auto n = static_cast<Eigen::Index>(vectors_.size());
  for (int q = 0; q < kAffineTerms; ++q) {
    const Vector mq_xi = system.apply_block(q, xi);
    Eigen::MatrixXd& m = stiffness_[q];
    m.conservativeResize(n + 1, n + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = vectors_[static_cast<std::size_t>(j)].dot(mq_xi);
      m(j, n) = v;
      m(n, j) = v;
    }
    m(n, n) = xi.dot(mq_xi);
    const int k = q / kDirections;
    const auto d = static_cast<Direction>(q % kDirections);
    loads_[q].conservativeResize(n + 1, 1);
    loads_[q](n, 0) = xi.dot(system.block_load(k, d));
    add_riesz_column(system.reference_solver().whiten(mq_xi));
  }
  vectors_.push_back(std::move(xi));
  provenance_.push_back(origin);
}

Vector ReducedBasis::reconstruct(const Eigen::VectorXd& coeffs) const {
  if (static_cast<std::size_t>(coeffs.size()) > vectors_.size()) {
    throw ValidationError("more reduced coefficients than basis vectors");
  }
  if (vectors_.empty()) throw ValidationError("cannot reconstruct from an empty basis");
  Vector out = Vector::Zero(vectors_.front().size());
  for (Eigen::Index n = 0; n < coeffs.size(); ++n) out += coeffs[n] * vectors_[static_cast<std::size_t>(n)];
  return out;
}

ReducedBasis ReducedBasis::truncated(std::size_t n) const {
  if (n > size()) throw ValidationError("truncation beyond basis size");
  ReducedBasis out;
  out.n_per_side_ = n_per_side_;
  out.fingerprint_ = fingerprint_;
  out.box_ = box_;
  out.vectors_.assign(vectors_.begin(), vectors_.begin() + static_cast<long>(n));
  const auto ni = static_cast<Eigen::Index>(n);
  for (int q = 0; q < kAffineTerms; ++q) {
    out.stiffness_[q] = stiffness_[q].topLeftCorner(ni, ni);
    out.loads_[q] = loads_[q].topRows(ni);
  }
  const std::size_t cols = riesz_columns(n);
  const std::size_t rows = rows_upto_[cols];
  out.riesz_factor_ = riesz_factor_.topLeftCorner(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  out.rows_upto_.assign(rows_upto_.begin(), rows_upto_.begin() + static_cast<long>(cols) + 1);
  out.provenance_.assign(provenance_.begin(), provenance_.begin() + static_cast<long>(n));
  out.notices_ = notices_;
  if (extendable_) {
    out.workspace_q_ = workspace_q_.leftCols(static_cast<Eigen::Index>(rows));
    out.extendable_ = true;
  }
  return out;
}

// ---------------------------------------------------------------------------

ErrorBound error_bound(const ReducedBasis& basis, const AffineCoeffs& coeffs,
                       const std::array<Eigen::VectorXd, kDirections>& w) {
  const auto n = static_cast<std::size_t>(w[0].size());
  const std::size_t cols = ReducedBasis::riesz_columns(n);
  const auto rows = static_cast<Eigen::Index>(basis.riesz_rows(cols));
  const auto factor = basis.riesz_factor().topLeftCorner(rows, static_cast<Eigen::Index>(cols));
  const double alpha = coeffs.alpha();

  ErrorBound out;
  Eigen::VectorXd c(static_cast<Eigen::Index>(cols));
  for (int i = 0; i < kDirections; ++i) {
    c.setZero();
    for (int k = 0; k < kBlockCount; ++k) c[affine_term(k, i)] = -coeffs.load[k][i];
    for (std::size_t m = 0; m < n; ++m) {
      const double wm = w[i][static_cast<Eigen::Index>(m)];
      const std::size_t base = kAffineTerms * (m + 1);
      for (int k = 0; k < kBlockCount; ++k) {
        for (int d = 0; d < kDirections; ++d) {
          c[static_cast<Eigen::Index>(base) + affine_term(k, d)] = -coeffs.stiffness[k][d] * wm;
        }
      }
    }
    out.dual_norm[i] = (factor * c).norm();
    out.delta_w[i] = out.dual_norm[i] / alpha;
  }
  for (int i = 0; i < kDirections; ++i) {
    for (int j = 0; j < kDirections; ++j) out.delta_s(i, j) = out.dual_norm[i] * out.dual_norm[j] / alpha;
  }
  return out;
}

OnlineResult online_solve(const ReducedBasis& basis, const AffineCoeffs& coeffs, std::size_t n_used,
                          bool with_bound) {
  const std::size_t n = n_used == 0 ? basis.size() : std::min(n_used, basis.size());
  const auto ni = static_cast<Eigen::Index>(n);
  OnlineResult out;
  out.n_used = n;
  out.alpha = coeffs.alpha();
  out.gamma = coeffs.gamma();

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(ni, ni);
  std::array<Eigen::VectorXd, kDirections> rhs;
  for (auto& r : rhs) r = Eigen::VectorXd::Zero(ni);
  for (int k = 0; k < kBlockCount; ++k) {
    for (int d = 0; d < kDirections; ++d) {
      const int q = affine_term(k, d);
      a.noalias() += coeffs.stiffness[k][d] * basis.reduced_stiffness(q).topLeftCorner(ni, ni);
      rhs[d].noalias() -= coeffs.load[k][d] * basis.reduced_load(q).col(0).head(ni);
    }
  }
  if (n > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      std::ostringstream os;
      os << "reduced matrix is not positive definite (N=" << n << ", alpha=" << out.alpha << ")";
      throw SolveError(os.str(), std::numeric_limits<double>::quiet_NaN());
    }
    for (int i = 0; i < kDirections; ++i) out.w[i] = llt.solve(rhs[i]);
  } else {
    for (auto& w : out.w) w = Eigen::VectorXd::Zero(0);
  }
  for (int i = 0; i < kDirections; ++i) {
    for (int j = 0; j < kDirections; ++j) out.s_n(i, j) = n > 0 ? -rhs[j].dot(out.w[i]) : 0.0;
  }
  out.a_star_n = coeffs.mean * Eigen::Matrix2d::Identity() + out.s_n;
  if (with_bound) {
    const ErrorBound b = error_bound(basis, coeffs, out.w);
    out.dual_norm = b.dual_norm;
    out.delta_w = b.delta_w;
    out.delta_s = b.delta_s;
    out.has_bound = true;
  }
  return out;
}

OnlineResult online_solve(const ReducedBasis& basis, const CellParam& param, std::size_t n_used,
                          bool with_bound) {
  OnlineResult out = online_solve(basis, affine_coeffs(param), n_used, with_bound);
  out.param = param;
  return out;
}

double direct_dual_norm(const AffineSystem& system, const ReducedBasis& basis,
                        const AffineCoeffs& coeffs, const Eigen::VectorXd& w, Direction dir) {
  const AssembledCell cell = assemble_at(system, coeffs);
  const int i = static_cast<int>(dir);
  Vector residual = cell.load[i];
  if (w.size() > 0) residual -= cell.stiffness * basis.reconstruct(w);
  // Remove the roundoff-level constant component before the quotient solve.
  residual.array() -= residual.mean();
  const Vector rep = system.reference_solver().solve(residual);
  return std::sqrt(std::max(0.0, rep.dot(system.reference_laplacian() * rep)));
}

// ---------------------------------------------------------------------------

GreedyResult greedy_build(const AffineSystem& system, std::span<const CellParam> sample,
                          const GreedyOptions& options, ParamBox box) {
  if (sample.empty()) throw ValidationError("greedy_build: empty training sample");
  for (const auto& p : sample) validate(p);
  if (options.n_max > kDirections * sample.size()) {
    throw ValidationError("greedy_build: N_max exceeds the snapshot count 2p");
  }

  GreedyResult result{ReducedBasis(system, box), {}};
  ReducedBasis& basis = result.basis;
  const std::size_t candidates = kDirections * sample.size();
  std::vector<bool> excluded(candidates, false);
  std::map<std::size_t, CellSolution> snapshots;

  auto snapshot = [&](std::size_t param_id) -> const CellSolution& {
    auto it = snapshots.find(param_id);
    if (it == snapshots.end()) it = snapshots.emplace(param_id, solve_cell(system, sample[param_id])).first;
    return it->second;
  };

  // Projection remainder against the current basis; modified Gram-Schmidt
  // with a second pass when most of the snapshot is already in the span.
  auto try_append = [&](std::size_t cand, double bound) -> bool {
    const std::size_t param_id = cand / kDirections;
    const int dir = static_cast<int>(cand % kDirections);
    const Vector& w = snapshot(param_id).w[dir];
    const double wnorm = seminorm(system, w);
    Vector r = w;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& xi : basis.vectors()) r -= h1_semi_inner(r, xi, system.reference_laplacian()) * xi;
      if (seminorm(system, r) >= 1e-6 * wnorm) break;
    }
    const double rnorm = seminorm(system, r);
    if (!(rnorm > kZeroNorm * std::max(1.0, wnorm))) {
      std::ostringstream os;
      os << "skipped candidate (param " << param_id << ", dir " << dir + 1
         << "): projection remainder " << rnorm << " below threshold";
      basis.add_notice(os.str());
      excluded[cand] = true;
      return false;
    }
    basis.append(system, r / rnorm, Selection{param_id, sample[param_id], static_cast<Direction>(dir), bound});
    excluded[cand] = true;
    return true;
  };

  // Seed: first (parameter, direction) pair in sample order with a nonzero snapshot.
  if (options.n_max > 0) {
    bool seeded = false;
    for (std::size_t cand = 0; cand < candidates && !seeded; ++cand) {
      seeded = try_append(cand, std::numeric_limits<double>::infinity());
    }
    if (!seeded) {
      basis.add_notice("degenerate sample: every snapshot is zero; basis left empty");
      return result;
    }
  }

  while (true) {
    const std::size_t n = basis.size();
    const auto online = online_sweep(basis, sample, n, true, options.execution);
    std::vector<double> rel(candidates, 0.0);
    for (std::size_t k = 0; k < sample.size(); ++k) {
      for (int i = 0; i < kDirections; ++i) {
        rel[kDirections * k + i] = selection_bound(online[k].delta_w[i], online[k].w_norm(i));
      }
    }
    GreedyStep step;
    step.n = n;
    step.max_rel_bound = *std::max_element(rel.begin(), rel.end());
    result.history.push_back(step);

    if (n >= options.n_max || step.max_rel_bound <= options.rel_tol) break;

    // Descending bound, ties broken by sample index then direction.
    std::vector<std::size_t> order(candidates);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rel[a] > rel[b]; });
    bool appended = false;
    for (std::size_t cand : order) {
      if (excluded[cand]) continue;
      if (try_append(cand, rel[cand])) {
        result.history.back().selected_param = static_cast<long>(cand / kDirections);
        result.history.back().selected_dir = static_cast<int>(cand % kDirections) + 1;
        appended = true;
        break;
      }
    }
    if (!appended) {
      basis.add_notice("every remaining candidate is numerically dependent; stopping");
      break;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

AuditReport effectivity_audit(const ReducedBasis& basis, const AffineSystem& system,
                              std::span<const CellParam> test_sample, const AuditOptions& options) {
  if (basis.fingerprint() != system.fingerprint()) throw BasisFileError("basis does not match system");
  AuditReport report;
  if (test_sample.empty()) return report;

  std::vector<std::size_t> n_values = options.n_values;
  if (n_values.empty()) n_values.push_back(basis.size());
  for (auto& n : n_values) n = std::min(n, basis.size());

  std::vector<std::vector<AuditEntry>> per_param(test_sample.size());
  for_each_index(test_sample.size(), options.execution, [&](std::size_t p) {
    const CellParam& param = test_sample[p];
    const AffineCoeffs coeffs = affine_coeffs(param);
    const CellSolution truth = solve_cell(system, coeffs);
    const HomogTensor tensor = homogenized_tensor(truth);
    std::array<double, kDirections> truth_norm{};
    for (int i = 0; i < kDirections; ++i) truth_norm[i] = seminorm(system, truth.w[i]);

    for (std::size_t n : n_values) {
      const OnlineResult rb = online_solve(basis, coeffs, n, true);
      for (int i = 0; i < kDirections; ++i) {
        AuditEntry e;
        e.param_id = p;
        e.param = param;
        e.dir = i + 1;
        e.n = n;
        const Vector approx = n > 0 ? basis.reconstruct(rb.w[i]) : Vector::Zero(system.dimension());
        e.true_err = seminorm(system, truth.w[i] - approx);
        e.truth_norm = truth_norm[i];
        e.bound = rb.delta_w[i];
        e.rel_bound = selection_bound(rb.delta_w[i], rb.w_norm(i));
        e.alpha = rb.alpha;
        e.gamma = rb.gamma;
        if (e.true_err > 1e-13) e.effectivity = e.bound / e.true_err;
        e.s_err = std::abs(tensor.s(i, i) - rb.s_n(i, i));
        e.s_bound = rb.delta_s(i, i);
        for (int j = 0; j < kDirections; ++j) {
          const double scale = std::sqrt(std::abs(tensor.s(i, i) * tensor.s(j, j)));
          if (scale > kZeroNorm) {
            e.max_s_rel_err = std::max(e.max_s_rel_err, std::abs(tensor.s(i, j) - rb.s_n(i, j)) / scale);
          }
          if (std::abs(tensor.s(i, j) - rb.s_n(i, j)) > rb.delta_s(i, j) + options.bound_slack) {
            e.s_bound = -std::abs(e.s_bound);  // flagged below
          }
        }
        per_param[p].push_back(e);
      }
    }
  });

  double min_alpha = std::numeric_limits<double>::infinity();
  double max_gamma = 0.0;
  for (std::size_t idx = 0; idx < n_values.size(); ++idx) {
    AuditSummary summary;
    summary.n = n_values[idx];
    std::vector<double> effs;
    for (std::size_t p = 0; p < per_param.size(); ++p) {
      for (int i = 0; i < kDirections; ++i) {
        AuditEntry& e = per_param[p][idx * kDirections + static_cast<std::size_t>(i)];
        min_alpha = std::min(min_alpha, e.alpha);
        max_gamma = std::max(max_gamma, e.gamma);
        summary.max_rel_bound = std::max(summary.max_rel_bound, e.rel_bound);
        if (e.truth_norm > kZeroNorm) {
          summary.max_rel_true_err = std::max(summary.max_rel_true_err, e.true_err / e.truth_norm);
        }
        summary.max_rel_s_err = std::max(summary.max_rel_s_err, e.max_s_rel_err);

        std::ostringstream why;
        if (e.true_err > e.bound + options.bound_slack) {
          why << "solution bound violated: error " << e.true_err << " > bound " << e.bound;
        } else if (e.s_bound < 0.0) {
          e.s_bound = -e.s_bound;
          why << "output bound violated";
        } else if (!std::isnan(e.effectivity) &&
                   (e.effectivity < 1.0 - options.effectivity_slack ||
                    e.effectivity > e.gamma / e.alpha + options.effectivity_slack)) {
          why << "effectivity " << e.effectivity << " outside [1, " << e.gamma / e.alpha << "]";
        }
        if (!why.str().empty()) {
          std::ostringstream os;
          os << "N=" << e.n << " param " << e.param_id << " dir " << e.dir << ": " << why.str();
          report.violations.push_back(os.str());
          ++summary.violations;
        }
        if (!std::isnan(e.effectivity)) effs.push_back(e.effectivity);
        report.entries.push_back(e);
      }
    }
    summary.effectivity_count = effs.size();
    if (!effs.empty()) {
      std::sort(effs.begin(), effs.end());
      summary.min_effectivity = effs.front();
      summary.max_effectivity = effs.back();
      summary.median_effectivity = effs.size() % 2 == 1
                                       ? effs[effs.size() / 2]
                                       : 0.5 * (effs[effs.size() / 2 - 1] + effs[effs.size() / 2]);
    }
    report.per_n.push_back(summary);
  }
  report.global_gamma_over_alpha = max_gamma / min_alpha;
  if (options.throw_on_violation && !report.violations.empty()) {
    throw BoundViolation(report.violations.front());
  }
  return report;
}

}  // namespace rbhom

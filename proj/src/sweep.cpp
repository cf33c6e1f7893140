#include "rbhom/sweep.hpp"

namespace rbhom {

std::vector<OnlineResult> online_sweep(const ReducedBasis& basis, std::span<const CellParam> params,
                                       std::size_t n_used, bool with_bound, Execution execution) {
  std::vector<OnlineResult> out(params.size());
  for_each_index(params.size(), execution, [&](std::size_t i) {
    out[i] = online_solve(basis, params[i], n_used, with_bound);
  });
  return out;
}

std::vector<CellSolution> truth_sweep(const AffineSystem& system, std::span<const CellParam> params,
                                      Execution execution) {
  std::vector<CellSolution> out(params.size());
  for_each_index(params.size(), execution,
                 [&](std::size_t i) { out[i] = solve_cell(system, params[i]); });
  return out;
}

std::vector<HomogTensor> truth_tensor_sweep(const AffineSystem& system,
                                            std::span<const CellParam> params, Execution execution) {
  std::vector<HomogTensor> out(params.size());
  for_each_index(params.size(), execution, [&](std::size_t i) {
    out[i] = homogenized_tensor(solve_cell(system, params[i]));
  });
  return out;
}

}  // namespace rbhom

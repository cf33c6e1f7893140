#pragma once

#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "rbhom/cell_problem.hpp"
#include "rbhom/reduced_basis.hpp"

namespace rbhom {

/// Runs body(i) for i in [0, count). The parallel path distributes indices
/// over OpenMP threads; the first exception thrown by any index is rethrown
/// after the loop. Each index must write only to its own output slot.
template <typename Body>
void for_each_index(std::size_t count, Execution execution, Body&& body) {
  if (execution == Execution::serial) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  const auto n = static_cast<long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(rbhom_sweep_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Reduced queries for a batch of parameters.
std::vector<OnlineResult> online_sweep(const ReducedBasis& basis, std::span<const CellParam> params,
                                       std::size_t n_used, bool with_bound, Execution execution);

/// Truth cell solves for a batch of parameters.
std::vector<CellSolution> truth_sweep(const AffineSystem& system, std::span<const CellParam> params,
                                      Execution execution);

/// Homogenized tensors for a batch of parameters, from either source.
std::vector<HomogTensor> truth_tensor_sweep(const AffineSystem& system,
                                            std::span<const CellParam> params, Execution execution);

}  // namespace rbhom

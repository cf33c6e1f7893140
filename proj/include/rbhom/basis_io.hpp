#pragma once

#include <filesystem>

#include "rbhom/cell_problem.hpp"
#include "rbhom/reduced_basis.hpp"

namespace rbhom {

/// Container layout (all integers and doubles little-endian):
///   "RBHOM001"
///   u32 version, i32 n_per_side, u64 N, f64 delta, f64 theta0,
///   u64 provenance length, u64 fingerprint, u64 dimension,
///   u64 riesz rows, u64 riesz columns
///   N x dimension basis values, 18 x N x N reduced stiffness,
///   18 x N reduced loads, riesz factor (column major),
///   (columns + 1) x u64 row counts, provenance records
///   u64 FNV-1a checksum of everything above
inline constexpr std::uint32_t kBasisFormatVersion = 1;

void save_basis(const ReducedBasis& basis, const std::filesystem::path& path);

/// Reads and validates a container against `system`; throws BasisFileError
/// on a bad header, truncation, checksum or fingerprint mismatch, or a basis
/// that is no longer orthonormal to 1e-10.
ReducedBasis load_basis(const std::filesystem::path& path, const AffineSystem& system);

/// Hex form of a basis or system fingerprint for report headers.
std::string fingerprint_hex(std::uint64_t fingerprint);

}  // namespace rbhom

#pragma once

// Numerical cutoffs shared by every module. Changing one of these changes the
// contract of the operations that reference it.
namespace invlr::tol {

/// ||g^order - I||_F must stay below this times d0.
inline constexpr double kRepresentation = 1e-10;
/// Singular values <= kRank * sigma_max * max(rows, cols) count as zero.
inline constexpr double kRank = 1e-12;
/// Symmetry check for pd_sqrt inputs, relative to max(1, ||M||_F).
inline constexpr double kSymmetry = 1e-10;
/// Eigenvalues <= kPositiveDefinite * lambda_max reject a PD input.
inline constexpr double kPositiveDefinite = 1e-12;
/// Relative gap below which two singular values are treated as equal.
inline constexpr double kSpectralGap = 1e-8;
/// Guard on the number of index subsets enumerated for critical points.
inline constexpr double kMaxSubsets = 1e6;
/// Orbit mean magnitude below which epsilon_inv is undefined.
inline constexpr double kOrbitMean = 1e-12;
/// Kernel interpolation residual bound, relative to ||y||.
inline constexpr double kKernelResidual = 1e-6;
/// Default kernel jitter, relative to trace / n.
inline constexpr double kKernelJitter = 1e-10;
/// Smallest accepted Cholesky pivot ratio (min/max of squared diagonal).
inline constexpr double kCholeskyPivot = 1e-14;
/// Training aborts when the objective exceeds this multiple of its start.
inline constexpr double kDivergence = 1e6;

}  // namespace invlr::tol

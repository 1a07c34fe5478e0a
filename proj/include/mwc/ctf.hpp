// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mwc/frontend.hpp"
#include "mwc/sensing_matrix.hpp"
#include "mwc/types.hpp"

namespace mwc {

/// Q = sum_n y[n] y[n]^H.
struct Frame {
    CMatrix Q;
    Eigen::Index snapshots = 0;
};

struct Decomposition {
    CMatrix V;                         ///< columns u_k sqrt(lambda_k), descending lambda
    std::vector<double> eigenvalues;   ///< every eigenvalue of Q, descending
    std::vector<double> kept;          ///< eigenvalues behind the columns of V
};

Frame build_frame(const SampleMatrix& samples);
Frame build_frame(const CMatrix& samples);

/// Keeps eigenpairs with lambda > rel_tol * lambda_max. A zero frame gives an empty V.
Decomposition decompose(const Frame& frame, double rel_tol);

/// Column scoring rule of the greedy joint-sparse solver.
enum class SelectionRule {
    /// Score ||C_j^H B|| / ||P C_j|| where B is an orthonormal basis of the residual
    /// range and P projects off the active columns (rank-aware order-recursive
    /// matching pursuit).
    rank_aware,
    /// Score ||C_j^H R|| / ||C_j|| on the raw residual (plain simultaneous OMP).
    classic,
};

std::string to_string(SelectionRule rule);
SelectionRule selection_rule_from_string(const std::string& s);

struct MmvOptions {
    double residual_tol = 1e-6;  ///< stop when ||R||_F <= residual_tol * ||V||_F
    SelectionRule rule = SelectionRule::rank_aware;
    /// Select conjugate slice pairs {l, -l} (and {0}) as single atoms, for real inputs.
    bool conjugate_pairs = false;
};

struct MmvSolution {
    CMatrix U;                    ///< cols(C) x cols(V), nonzero only on active rows
    std::vector<int> active;      ///< column indices of C in selection order
    std::vector<double> residual_curve;  ///< ||R||_F / ||V||_F, first entry before any pick
    int iterations = 0;
    bool rank_deficient = false;
    std::string stop_reason;
};

/// Greedy row-sparse solution of V = C U with at most max_rows active rows.
/// Ties within 1e-10 relative score go to the lowest |l|, then to positive l.
MmvSolution solve_mmv(const SensingMatrix& C, const CMatrix& V, int max_rows, const MmvOptions& options = {});

struct DetectOptions {
    double rel_tol = 1e-4;       ///< noise-space removal threshold
    double residual_tol = 1e-6;  ///< noiseless residual floor
    bool symmetrize = true;      ///< add -l for every detected l
    bool noise_aware = false;    ///< estimate the noise floor from the trailing eigenvalues
    SelectionRule rule = SelectionRule::rank_aware;
    bool conjugate_pairs = true; ///< pair-wise selection; the support is then symmetric
};

struct CtfDiagnostics {
    std::vector<double> eigenvalues;
    std::vector<double> kept_eigenvalues;
    std::vector<double> residual_curve;
    std::vector<int> selection_order;  ///< slice indices
    int iterations = 0;
    bool rank_deficient = false;
    std::string stop_reason;
    double residual_tol = 0.0;
    double wall_time_s = 0.0;
};

struct Detection {
    SupportSet support;
    SupportSet solver_support;  ///< before symmetrization
    CtfDiagnostics diagnostics;
};

/// build_frame -> decompose -> solve_mmv, mapped to slice indices.
Detection detect_support(const SampleMatrix& samples, const SensingMatrix& C, int sparsity,
                         const DetectOptions& options = {});

struct HoleMap {
    std::vector<Interval> holes;
};

/// Union of free slice intervals, adjacent ones merged. positive_only keeps l >= 0
/// and clips the l = 0 slice at 0 Hz.
HoleMap spectrum_holes(const SupportSet& support, double f_p, int L, bool positive_only);

/// Merged intervals of the occupied slices, with the same clipping as spectrum_holes.
std::vector<Interval> occupied_intervals(const SupportSet& support, double f_p, int L, bool positive_only);

}  // namespace mwc

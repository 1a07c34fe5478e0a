// SPDX-License-Identifier: Apache-2.0

#include "mwc/ctf.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mwc/error.hpp"

namespace mwc {
namespace {

// Orthonormal basis for the column space of R.
CMatrix range_basis(const CMatrix& R, double abs_tol = 0.0)
{
    Eigen::JacobiSVD<CMatrix> svd(R, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return CMatrix(R.rows(), 0);
    const double tol = std::max(1e-10 * s(0), abs_tol);
    const auto r = (s.array() > tol).count();
    return svd.matrixU().leftCols(r);
}

// Order used to break score ties: |l| ascending, then positive first.
bool preferred(int a, int b)
{
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a > b;
}

}  // namespace

std::string to_string(SelectionRule rule)
{
    return rule == SelectionRule::classic ? "classic" : "rank_aware";
}

SelectionRule selection_rule_from_string(const std::string& s)
{
    if (s == "rank_aware") return SelectionRule::rank_aware;
    if (s == "classic") return SelectionRule::classic;
    throw InvalidArgument("unknown selection rule '" + s + "'");
}

Frame build_frame(const CMatrix& y)
{
    Frame f;
    f.snapshots = y.cols();
    f.Q = y * y.adjoint();
    // Exact Hermitian symmetry; the product is only symmetric to rounding.
    f.Q = (0.5 * (f.Q + CMatrix(f.Q.adjoint()))).eval();
    return f;
}

Frame build_frame(const SampleMatrix& samples) { return build_frame(samples.rows); }

Decomposition decompose(const Frame& frame, double rel_tol)
{
    if (!(rel_tol >= 0.0 && rel_tol < 1.0)) throw InvalidArgument("rel_tol must lie in [0, 1)");
    Decomposition d;
    const auto n = frame.Q.rows();
    if (n == 0) return d;
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(frame.Q);
    const auto& lam = eig.eigenvalues();  // ascending
    for (Eigen::Index k = n - 1; k >= 0; --k) d.eigenvalues.push_back(lam(k));
    const double lmax = d.eigenvalues.front();
    if (!(lmax > 0.0)) {
        d.V.resize(n, 0);
        return d;
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = n - 1; k >= 0; --k)
        if (lam(k) > rel_tol * lmax && lam(k) > 0.0) keep.push_back(k);
    d.V.resize(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        d.V.col(static_cast<Eigen::Index>(j)) = eig.eigenvectors().col(keep[j]) * std::sqrt(lam(keep[j]));
        d.kept.push_back(lam(keep[j]));
    }
    return d;
}

MmvSolution solve_mmv(const SensingMatrix& C, const CMatrix& V, int max_rows, const MmvOptions& opt)
{
    const auto& A = C.entries;
    if (V.rows() != A.rows()) throw InvalidArgument("V row count differs from C row count");
    if (max_rows < 0 || max_rows > A.cols()) throw InvalidArgument("max_rows outside [0, columns of C]");

    MmvSolution sol;
    sol.U = CMatrix::Zero(A.cols(), V.cols());
    const double vnorm = V.norm();
    if (V.cols() == 0 || vnorm == 0.0) {
        sol.residual_curve.push_back(0.0);
        sol.stop_reason = "zero measurement frame";
        return sol;
    }
    sol.residual_curve.push_back(1.0);
    if (max_rows == 0) {
        sol.stop_reason = "sparsity cap reached";
        return sol;
    }

    const Eigen::VectorXd norms = A.colwise().norm().transpose();

    // Candidate atoms: single columns, or the slice pairs a real input populates.
    // Content at offset d in slice l mirrors to -d in slice -l, except the Nyquist
    // offset -K/2, whose mirror +K/2 is owned by slice 1 - l.
    std::vector<std::vector<Eigen::Index>> groups;
    if (opt.conjugate_pairs) {
        groups.push_back({C.column_of(0)});
        for (int l = 1; l <= C.L; ++l) groups.push_back({C.column_of(l), C.column_of(-l)});
        for (int l = 1; l <= C.L; ++l) groups.push_back({C.column_of(l), C.column_of(1 - l)});
    } else {
        for (Eigen::Index j = 0; j < A.cols(); ++j) groups.push_back({j});
    }
    std::vector<bool> used(groups.size(), false);
    CMatrix R = V;
    CMatrix coef;
    CMatrix Q_active(A.rows(), 0);  // orthonormal basis of the active columns

    while (static_cast<int>(sol.active.size()) < max_rows) {
        const auto room = static_cast<std::size_t>(max_rows) - sol.active.size();
        std::vector<double> score(groups.size(), 0.0);
        if (opt.rule == SelectionRule::rank_aware) {
            const CMatrix B = range_basis(R);
            if (B.cols() == 0) break;
            for (std::size_t g = 0; g < groups.size(); ++g) {
                const auto& cols = groups[g];
                if (used[g] || cols.size() > room) continue;
                CMatrix Ag(A.rows(), static_cast<Eigen::Index>(cols.size()));
                double ref = 0.0;
                for (std::size_t k = 0; k < cols.size(); ++k) {
                    Ag.col(static_cast<Eigen::Index>(k)) = A.col(cols[k]);
                    ref = std::max(ref, norms(cols[k]));
                }
                const CMatrix Pg = Ag - Q_active * (Q_active.adjoint() * Ag);
                const CMatrix Qg = range_basis(Pg, 1e-10 * ref);
                if (Qg.cols() == 0) continue;
                // Captured share of the residual range, out of what an atom of this
                // dimension could capture; every correct atom scores 1.
                const auto dim = std::min(Qg.cols(), B.cols());
                score[g] = std::sqrt((Qg.adjoint() * B).squaredNorm() / static_cast<double>(dim));
            }
        } else {
            const CMatrix corr = A.adjoint() * R;
            for (std::size_t g = 0; g < groups.size(); ++g) {
                const auto& cols = groups[g];
                if (used[g] || cols.size() > room) continue;
                double num = 0.0, den = 0.0;
                for (auto j : cols) {
                    num += corr.row(j).squaredNorm();
                    den += norms(j) * norms(j);
                }
                if (den > 0.0) score[g] = std::sqrt(num / den);
            }
        }

        std::ptrdiff_t best = -1;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            if (score[g] <= 0.0) continue;
            const auto b = static_cast<std::size_t>(best);
            if (best < 0 || score[g] > score[b] * (1.0 + 1e-10)) {
                best = static_cast<std::ptrdiff_t>(g);
            } else if (score[g] >= score[b] * (1.0 - 1e-10) &&
                       preferred(C.slice_of(static_cast<int>(groups[g].front())),
                                 C.slice_of(static_cast<int>(groups[b].front())))) {
                best = static_cast<std::ptrdiff_t>(g);
            }
        }
        if (best < 0) {
            sol.stop_reason = "no candidate column correlates with the residual";
            break;
        }
        used[static_cast<std::size_t>(best)] = true;
        for (auto j : groups[static_cast<std::size_t>(best)]) sol.active.push_back(static_cast<int>(j));
        ++sol.iterations;

        CMatrix As(A.rows(), static_cast<Eigen::Index>(sol.active.size()));
        for (std::size_t k = 0; k < sol.active.size(); ++k) As.col(static_cast<Eigen::Index>(k)) = A.col(sol.active[k]);
        Eigen::ColPivHouseholderQR<CMatrix> qr(As);
        qr.setThreshold(1e-12);
        if (qr.rank() < As.cols()) sol.rank_deficient = true;
        coef = qr.solve(V);
        R = V - As * coef;
        Eigen::HouseholderQR<CMatrix> hq(As);
        Q_active = hq.householderQ() * CMatrix::Identity(A.rows(), std::min(As.cols(), A.rows()));
        const double rel = R.norm() / vnorm;
        sol.residual_curve.push_back(rel);
        if (rel <= opt.residual_tol) {
            sol.stop_reason = "residual floor reached";
            break;
        }
    }
    if (sol.stop_reason.empty()) sol.stop_reason = "sparsity cap reached";
    for (std::size_t k = 0; k < sol.active.size(); ++k) sol.U.row(sol.active[k]) = coef.row(static_cast<Eigen::Index>(k));
    return sol;
}

Detection detect_support(const SampleMatrix& samples, const SensingMatrix& C, int sparsity, const DetectOptions& opt)
{
    const auto t0 = std::chrono::steady_clock::now();
    if (sparsity < 0 || sparsity > C.cols()) throw InvalidArgument("sparsity outside [0, 2L + 1]");
    Detection det;
    const Frame frame = build_frame(samples);
    Decomposition dec = decompose(frame, opt.rel_tol);

    MmvOptions mo;
    mo.rule = opt.rule;
    mo.conjugate_pairs = opt.conjugate_pairs;
    mo.residual_tol = opt.residual_tol;
    if (opt.noise_aware && !dec.eigenvalues.empty()) {
        // Noise level: mean of the smallest quarter of the eigenvalues.
        const std::size_t n = dec.eigenvalues.size();
        const std::size_t tail = std::max<std::size_t>(1, n / 4);
        double noise = 0.0;
        for (std::size_t k = n - tail; k < n; ++k) noise += std::max(0.0, dec.eigenvalues[k]);
        noise /= static_cast<double>(tail);
        Frame f2 = frame;
        const double lmax = dec.eigenvalues.front();
        const double tol = lmax > 0.0 ? std::min(0.999, std::max(opt.rel_tol, 4.0 * noise / lmax)) : opt.rel_tol;
        dec = decompose(f2, tol);
        const double vn2 = dec.V.squaredNorm();
        if (vn2 > 0.0)
            mo.residual_tol = std::max(opt.residual_tol, std::sqrt(2.0 * static_cast<double>(dec.V.cols()) * noise / vn2));
    }

    const MmvSolution sol = solve_mmv(C, dec.V, sparsity, mo);
    for (int j : sol.active) {
        det.solver_support.insert(C.slice_of(j));
        det.diagnostics.selection_order.push_back(C.slice_of(j));
    }
    det.support = det.solver_support;
    if (opt.symmetrize) {
        for (int l : det.solver_support.indices)
            if (-l >= -C.L && -l <= C.L) det.support.insert(-l);
    }
    auto& d = det.diagnostics;
    d.eigenvalues = dec.eigenvalues;
    d.kept_eigenvalues = dec.kept;
    d.residual_curve = sol.residual_curve;
    d.iterations = sol.iterations;
    d.rank_deficient = sol.rank_deficient;
    d.stop_reason = sol.stop_reason;
    d.residual_tol = mo.residual_tol;
    d.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return det;
}

namespace {

std::vector<Interval> merged(const std::vector<int>& slices, double f_p, bool positive_only)
{
    std::vector<Interval> out;
    for (int l : slices) {
        Interval iv{l * f_p - f_p / 2.0, l * f_p + f_p / 2.0};
        if (positive_only) iv.lo = std::max(iv.lo, 0.0);
        if (!out.empty() && std::abs(out.back().hi - iv.lo) <= 1e-9 * f_p) {
            out.back().hi = iv.hi;
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

}  // namespace

HoleMap spectrum_holes(const SupportSet& support, double f_p, int L, bool positive_only)
{
    for (int l : support.indices)
        if (l < -L || l > L) throw InvalidArgument("support index outside [-L, L]");
    std::vector<int> free;
    for (int l = positive_only ? 0 : -L; l <= L; ++l)
        if (!support.contains(l)) free.push_back(l);
    return {merged(free, f_p, positive_only)};
}

std::vector<Interval> occupied_intervals(const SupportSet& support, double f_p, int L, bool positive_only)
{
    std::vector<int> occ;
    for (int l = positive_only ? 0 : -L; l <= L; ++l)
        if (support.contains(l)) occ.push_back(l);
    return merged(occ, f_p, positive_only);
}

}  // namespace mwc

// SPDX-License-Identifier: Apache-2.0

#include "mwc/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mwc/error.hpp"
#include "mwc/fft.hpp"

namespace mwc {

SliceSet recover_slices(const SampleMatrix& samples, const SensingMatrix& C, const SupportSet& support)
{
    if (support.empty()) throw InvalidArgument("recover_slices needs a nonempty support");
    if (samples.rows.rows() != C.rows()) throw InvalidArgument("sample rows differ from sensing rows");
    const auto k = static_cast<Eigen::Index>(support.size());
    if (k > C.rows())
        throw ReconstructionIllPosed("support has more slices than there are measurement rows", support.indices);
    CMatrix As(C.rows(), k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const int l = support.indices[static_cast<std::size_t>(j)];
        if (l < -C.L || l > C.L) throw InvalidArgument("support index outside [-L, L]");
        As.col(j) = C.entries.col(C.column_of(l));
    }
    Eigen::ColPivHouseholderQR<CMatrix> qr(As);
    qr.setThreshold(1e-10);
    if (qr.rank() < k) {
        std::vector<int> bad;
        for (Eigen::Index j = qr.rank(); j < k; ++j)
            bad.push_back(support.indices[static_cast<std::size_t>(qr.colsPermutation().indices()(j))]);
        std::ranges::sort(bad);
        std::string msg = "sensing columns for slices";
        for (int l : bad) msg += " " + std::to_string(l);
        throw ReconstructionIllPosed(msg + " are linearly dependent on the rest of the support", bad);
    }
    const CMatrix z = qr.solve(samples.rows);
    SliceSet out;
    out.f_p = C.f_p;
    for (Eigen::Index j = 0; j < k; ++j) {
        std::vector<Complex> v(static_cast<std::size_t>(z.cols()));
        for (Eigen::Index n = 0; n < z.cols(); ++n) v[static_cast<std::size_t>(n)] = z(j, n);
        out.slices.emplace(support.indices[static_cast<std::size_t>(j)], std::move(v));
    }
    return out;
}

SliceSet slices_from_oracle(const CMatrix& z, double f_p, int L, const SupportSet& support)
{
    SliceSet out;
    out.f_p = f_p;
    for (int l : support.indices) {
        if (l < -L || l > L) throw InvalidArgument("support index outside [-L, L]");
        std::vector<Complex> v(static_cast<std::size_t>(z.cols()));
        for (Eigen::Index n = 0; n < z.cols(); ++n) v[static_cast<std::size_t>(n)] = z(l + L, n);
        out.slices.emplace(l, std::move(v));
    }
    return out;
}

DenseSignal reconstruct_signal(const SliceSet& slices, double grid_rate, double duration_s)
{
    DenseSignal x;
    x.sample_rate_hz = grid_rate;
    const auto N = static_cast<long long>(std::llround(duration_s * grid_rate));
    x.samples.assign(static_cast<std::size_t>(std::max(0LL, N)), 0.0);
    if (slices.slices.empty() || N == 0) return x;
    const auto K = static_cast<long long>(slices.length());
    const double p = grid_rate / slices.f_p;
    if (std::abs(p - std::round(p)) > 1e-9 * p || std::llround(p) * K != N)
        throw InvalidArgument("grid rate and duration do not match the slice record");
    std::vector<Complex> X(static_cast<std::size_t>(N), 0.0);
    for (const auto& [l, z] : slices.slices) {
        if (static_cast<long long>(z.size()) != K) throw InvalidArgument("slice sequences differ in length");
        const auto Z = fft::forward(std::span<const Complex>(z));
        const long long start = -(K / 2);
        for (long long d = start; d < start + K; ++d)
            X[fft::wrap(l * K + d, N)] += Z[fft::wrap(d, K)] * (static_cast<double>(N) / static_cast<double>(K));
    }
    const auto t = fft::inverse(X);
    for (long long n = 0; n < N; ++n) x.samples[static_cast<std::size_t>(n)] = t[static_cast<std::size_t>(n)].real() / static_cast<double>(N);
    double top = 0.0;
    for (const auto& kv : slices.slices) top = std::max(top, (std::abs(kv.first) + 0.5) * slices.f_p);
    x.f_max_hz = std::min(top, grid_rate / 2.0);
    return x;
}

std::vector<std::vector<int>> positive_groups(const SupportSet& support)
{
    std::vector<std::vector<int>> groups;
    for (int l : support.indices) {
        if (l < 0) continue;
        if (!groups.empty() && groups.back().back() == l - 1) {
            groups.back().push_back(l);
        } else {
            groups.push_back({l});
        }
    }
    return groups;
}

StitchedBand stitch_group(const SliceSet& slices, const std::vector<int>& group)
{
    StitchedBand band;
    if (group.empty()) return band;
    const auto K = static_cast<long long>(slices.length());
    const auto G = static_cast<long long>(group.size());
    band.rate_hz = static_cast<double>(G) * slices.f_p;
    band.f_lo_hz = group.front() * slices.f_p - static_cast<double>(K / 2) * slices.f_p / static_cast<double>(K);
    std::vector<Complex> spec(static_cast<std::size_t>(G * K), 0.0);
    for (long long g = 0; g < G; ++g) {
        const auto it = slices.slices.find(group[static_cast<std::size_t>(g)]);
        if (it == slices.slices.end()) throw InvalidArgument("group slice missing from slice set");
        const auto Z = fft::forward(std::span<const Complex>(it->second));
        for (long long d = -(K / 2); d < K - K / 2; ++d)
            spec[static_cast<std::size_t>(g * K + d + K / 2)] = Z[fft::wrap(d, K)];
    }
    // Composite bin j sits at f_lo + j f_p / K, i.e. at baseband bin j of a G K record.
    const auto t = fft::inverse(spec);
    band.samples.resize(t.size());
    for (std::size_t n = 0; n < t.size(); ++n) band.samples[n] = t[n] / static_cast<double>(K);
    return band;
}

CarrierReport estimate_carriers(const SliceSet& slices, const SupportSet& support, const CarrierOptions& opt)
{
    CarrierReport rep;
    if (support.empty()) throw InvalidArgument("estimate_carriers needs a nonempty support");
    const double pi = std::numbers::pi;
    for (const auto& group : positive_groups(support)) {
        const StitchedBand band = stitch_group(slices, group);
        const auto n = band.samples.size();
        if (n == 0) continue;
        std::size_t nfft = std::max<std::size_t>(opt.min_fft, 4 * n);
        nfft = std::bit_ceil(nfft);
        std::vector<Complex> buf(nfft, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            const double w = n > 1 ? 0.5 - 0.5 * std::cos(2.0 * pi * static_cast<double>(k) / static_cast<double>(n)) : 1.0;
            buf[k] = band.samples[k] * w;
        }
        const auto S = fft::forward(std::span<const Complex>(buf));
        std::vector<double> pw(nfft);
        for (std::size_t k = 0; k < nfft; ++k) pw[k] = std::norm(S[k]);
        const auto peak_it = std::ranges::max_element(pw);
        const double peak = *peak_it;
        std::string label = "slices";
        for (int l : group) label += " " + std::to_string(l);
        if (!(peak > 0.0)) {
            rep.diagnostics.push_back(label + ": all-zero group skipped");
            continue;
        }
        const auto p = static_cast<std::size_t>(peak_it - pw.begin());
        const double res = band.rate_hz / static_cast<double>(nfft);

        // Extent of bins within occupancy_db of the peak, on the unwrapped axis.
        const double floor_pw = peak * std::pow(10.0, -opt.occupancy_db / 10.0);
        std::size_t first = p, last = p;
        for (std::size_t k = 0; k < nfft; ++k) {
            if (pw[k] >= floor_pw) {
                first = std::min(first, k);
                last = std::max(last, k);
            }
        }
        CarrierEstimate est;
        est.slices = group;
        est.occupied_hz = static_cast<double>(last - first) * res;
        const double record_bin = slices.f_p / static_cast<double>(slices.length());
        if (est.occupied_hz > opt.spread_bins * record_bin) {
            // A taper reweights time and so biases the power centroid of a swept
            // carrier; the unwindowed record spectrum gives the mean instantaneous
            // frequency over the record.
            const auto R = fft::forward(std::span<const Complex>(band.samples));
            const double bin = band.rate_hz / static_cast<double>(n);
            double rpeak = 0.0;
            for (const auto& v : R) rpeak = std::max(rpeak, std::norm(v));
            const double rfloor = rpeak * std::pow(10.0, -opt.occupancy_db / 10.0);
            std::size_t k_first = n, k_last = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (std::norm(R[k]) >= rfloor) {
                    k_first = std::min(k_first, k);
                    k_last = std::max(k_last, k);
                }
            }
            double num = 0.0, den = 0.0;
            for (std::size_t k = k_first; k <= k_last; ++k) {
                const double f = static_cast<double>(k) * bin;
                const double w = std::norm(R[k]);
                num += w * f;
                den += w;
            }
            est.frequency_hz = band.f_lo_hz + num / den;
            est.method = "centroid";
        } else {
            // Quadratic fit through the log-power of the peak and its circular neighbours.
            const double a = std::log(pw[(p + nfft - 1) % nfft] + 1e-300);
            const double b = std::log(pw[p]);
            const double c = std::log(pw[(p + 1) % nfft] + 1e-300);
            const double den = a - 2.0 * b + c;
            const double delta = den != 0.0 ? 0.5 * (a - c) / den : 0.0;
            double pos = static_cast<double>(p) + std::clamp(delta, -0.5, 0.5);
            // Peaks in the last bin are the wrapped main lobe of a tone on f_lo; the
            // group's upper edge itself belongs to the next slice.
            if (pos > static_cast<double>(nfft) - 1.5) pos -= static_cast<double>(nfft);
            est.frequency_hz = band.f_lo_hz + pos * res;
            est.method = "peak";
        }
        rep.carriers.push_back(std::move(est));
    }
    return rep;
}

std::vector<double> envelope(const StitchedBand& band)
{
    std::vector<double> e(band.samples.size());
    for (std::size_t n = 0; n < e.size(); ++n) e[n] = std::abs(band.samples[n]);
    return e;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b)
{
    if (a.size() != b.size() || a.empty()) throw InvalidArgument("correlation needs equal nonempty sequences");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        sab += (a[k] - ma) * (b[k] - mb);
        saa += (a[k] - ma) * (a[k] - ma);
        sbb += (b[k] - mb) * (b[k] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

}  // namespace mwc

// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace mwc {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// Sorted set of spectral slice indices l in [-L, L].
struct SupportSet {
    std::vector<int> indices;

    SupportSet() = default;
    explicit SupportSet(std::vector<int> idx);

    bool contains(int l) const;
    void insert(int l);
    std::size_t size() const noexcept { return indices.size(); }
    bool empty() const noexcept { return indices.empty(); }
    bool operator==(const SupportSet&) const = default;

    /// Returns the set closed under l -> -l.
    SupportSet symmetrized() const;
};

/// Closed frequency interval in Hz.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const Interval&) const = default;
};

}  // namespace mwc

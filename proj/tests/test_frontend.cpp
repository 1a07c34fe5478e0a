// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "mwc/error.hpp"
#include "mwc/frontend.hpp"
#include "mwc/pipeline.hpp"
#include "oracles.hpp"

using namespace mwc;

namespace {

MwcConfig prototype()
{
    MwcConfig c;
    c.m = 4;
    c.q = 3;
    c.f_p = 20e6;
    c.f_s = 70e6;
    c.m_chips = 108;
    c.L = 55;
    c.n_snapshots = 64;
    return c;
}

SignalScenario tone(double f, double f_max = 1e9)
{
    SignalScenario s;
    s.f_max = f_max;
    s.n_bands_max = 6;
    s.band_width_max_hz = 5e6;
    s.seed = 3;
    BandSpec b;
    b.carrier_hz = f;
    s.bands = {b};
    return s;
}

}  // namespace

TEST_CASE("virtual shifts and default L")
{
    CHECK(virtual_shifts(1) == std::vector<int>{0});
    CHECK(virtual_shifts(2) == std::vector<int>{-1, 0});
    CHECK(virtual_shifts(3) == std::vector<int>{-1, 0, 1});
    CHECK(virtual_shifts(4) == std::vector<int>{-2, -1, 0, 1});
    CHECK_THROWS_AS(virtual_shifts(0), InvalidConfig);
    const int L = default_L(1e9, 20e6, 20e6);
    CHECK((2 * L + 1) * 20e6 >= 2e9 + 20e6);
    CHECK((2 * L - 1) * 20e6 < 2e9 + 20e6);
}

TEST_CASE("rate report: prototype")
{
    SignalScenario s = tone(400e6);
    const auto r = validate_config(prototype(), s);
    CHECK(r.total_rate_hz == doctest::Approx(280e6));
    CHECK(r.nyquist_rate_hz == doctest::Approx(2e9));
    CHECK(r.ratio == doctest::Approx(0.14));
    CHECK_FALSE(r.basic_configuration);
}

TEST_CASE("rate report: basic configuration meets 4NB")
{
    MwcConfig c;
    c.m = 24;
    c.q = 1;
    c.f_p = 20e6;
    c.f_s = 20e6;
    c.m_chips = 108;
    c.L = 55;
    SignalScenario s = tone(400e6);
    s.n_bands_max = 6;
    s.band_width_max_hz = 20e6;
    const auto r = validate_config(c, s);
    CHECK(r.total_rate_hz == doctest::Approx(480e6));
    CHECK(r.target_rate_hz == doctest::Approx(480e6));
    CHECK(r.rate_guidance_met);
    CHECK(r.basic_configuration);
    CHECK(r.advisories.empty());

    c.m = 23;
    const auto low = validate_config(c, s);
    CHECK_FALSE(low.rate_guidance_met);
    CHECK_FALSE(low.basic_configuration);
    CHECK_FALSE(low.advisories.empty());
}

TEST_CASE("structural errors throw InvalidConfig")
{
    MwcConfig c = prototype();
    c.q = 2;
    c.f_s = c.f_p;
    CHECK_THROWS_AS(check_structure(c), InvalidConfig);
    CHECK_THROWS_AS(validate_config(c, tone(1e8)), InvalidConfig);
    c = prototype();
    c.m = 0;
    CHECK_THROWS_AS(check_structure(c), InvalidConfig);
    c = prototype();
    c.n_snapshots = 0;
    CHECK_THROWS_AS(check_structure(c), InvalidConfig);
}

TEST_CASE("default grid rate is a chip-rate multiple above twice f_max")
{
    const auto c = prototype();
    const double g = default_grid_rate(c, 1e9);
    CHECK(std::fmod(g, c.chip_rate()) == doctest::Approx(0.0));
    CHECK(g >= 2.16e9);
}

TEST_CASE("frontend: zero input gives zero samples")
{
    const auto c = prototype();
    SignalScenario s = tone(400e6);
    s.bands.clear();
    const auto acq = acquire(s, c, make_bank(BankSpec{}, c));
    CHECK(acq.samples.row_count() == 12);
    CHECK(acq.samples.snapshots() == 64);
    CHECK(acq.samples.rows.norm() == 0.0);
}

TEST_CASE("frontend is linear")
{
    const auto c = prototype();
    const auto bank = make_bank(BankSpec{}, c);
    SignalScenario a = tone(123.4e6), b = tone(777.7e6), ab = tone(123.4e6);
    a.bands[0].amplitude = 0.6;
    ab.bands[0].amplitude = 0.6;
    ab.bands.push_back(b.bands[0]);
    const auto ya = acquire(a, c, bank).samples.rows;
    const auto yb = acquire(b, c, bank).samples.rows;
    const auto yab = acquire(ab, c, bank).samples.rows;
    CHECK((yab - ya - yb).norm() <= 1e-9 * yab.norm());
}

TEST_CASE("expand_channels: q = 1 is the identity")
{
    MwcConfig c = prototype();
    c.q = 1;
    c.f_s = c.f_p;
    c.m = 2;
    std::mt19937_64 rng(1);
    ChannelSamples raw;
    raw.rate_hz = c.f_s;
    for (int i = 0; i < 2; ++i) {
        const CMatrix r = oracle::random_complex(1, 33, rng);
        raw.channels.emplace_back(r.data(), r.data() + 33);
    }
    const auto sm = expand_channels(raw, c);
    REQUIRE(sm.row_count() == 2);
    REQUIRE(sm.snapshots() == 33);
    for (int i = 0; i < 2; ++i)
        for (int n = 0; n < 33; ++n) CHECK(std::abs(sm.rows(i, n) - raw.channels[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)]) < 1e-12);
}

TEST_CASE("expand_channels: q = 3 rows are channel-major, shift-minor")
{
    MwcConfig c = prototype();
    c.m = 2;
    c.f_s = 3 * c.f_p;
    const int K = 16;
    const int n_raw = 3 * K;
    // Channel i carries a tone at shift r_i f_p; only row (i, r_i) may respond.
    const int r_of[2] = {1, -1};
    ChannelSamples raw;
    raw.rate_hz = c.f_s;
    for (int i = 0; i < 2; ++i) {
        std::vector<Complex> ch(static_cast<std::size_t>(n_raw));
        for (int n = 0; n < n_raw; ++n)
            ch[static_cast<std::size_t>(n)] = std::polar(1.0, 2.0 * std::numbers::pi * r_of[i] * K * n / n_raw);
        raw.channels.push_back(std::move(ch));
    }
    const auto sm = expand_channels(raw, c);
    REQUIRE(sm.row_count() == 6);
    CHECK(sm.ordering == "channel-major/shift-minor");
    const auto shifts = virtual_shifts(3);
    for (int i = 0; i < 2; ++i)
        for (int k = 0; k < 3; ++k) {
            const double e = sm.rows.row(i * 3 + k).norm();
            if (shifts[static_cast<std::size_t>(k)] == r_of[i]) {
                CHECK(e == doctest::Approx(std::sqrt(static_cast<double>(K))).epsilon(1e-9));
            } else {
                CHECK(e < 1e-9);
            }
        }
}

TEST_CASE("slice_oracle: a tone at 400 MHz occupies only slices +-20")
{
    SignalScenario s = tone(400e6);
    s.duration_s = 64 / 20e6;
    const auto x = synthesize(s, 4.32e9);
    const auto z = slice_oracle(x, 20e6, 55);
    REQUIRE(z.rows() == 111);
    REQUIRE(z.cols() == 64);
    for (int l = -55; l <= 55; ++l) {
        const double e = z.row(l + 55).norm();
        if (std::abs(l) == 20) CHECK(e > 1.0);
        else CHECK(e < 1e-9);
    }
    // Real input: z_{-l} = conj(z_l).
    for (int l = 0; l <= 55; ++l) CHECK((z.row(55 - l) - z.row(55 + l).conjugate()).norm() <= 1e-9);
}

TEST_CASE("slice_oracle agrees with a direct DFT and is grid independent")
{
    SignalScenario s = tone(301.25e6);
    BandSpec am;
    am.carrier_hz = 512.5e6;
    am.bandwidth_hz = 2e6;
    am.modulation = Modulation::am;
    am.mod_params.envelope_hz = 625e3;
    s.bands.push_back(am);
    const double f_p = 20e6;
    s.duration_s = 32 / f_p;
    const double grid = 4.32e9;
    const auto x = synthesize(s, grid);
    const auto z = slice_oracle(x, f_p, 55, 32);
    const long long K = 32;
    const long long N = static_cast<long long>(x.samples.size());
    for (int l : {15, 25, 26, -26}) {
        // z_l[n] = (1/N) sum over owned bins b of X[b] e^{j 2 pi (b - l K) n / K}
        for (long long n : {0LL, 5LL, 31LL}) {
            Complex ref = 0.0;
            for (long long b = l * K - K / 2; b < l * K - K / 2 + K; ++b)
                ref += oracle::dft_bin(x.samples, b) *
                       std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(b - l * K) * static_cast<double>(n) / static_cast<double>(K));
            ref /= static_cast<double>(N);
            CHECK(std::abs(z(l + 55, n) - ref) < 1e-9);
        }
    }

    const auto x2 = synthesize(s, 2.0 * grid);
    const auto z2 = slice_oracle(x2, f_p, 55, 32);
    CHECK((z2 - z).norm() <= 1e-6 * z.norm());

    // Energy lives on the true support only.
    const auto S = true_support(s, f_p, 55);
    double off = 0.0;
    for (int l = -55; l <= 55; ++l)
        if (!S.contains(l)) off += z.row(l + 55).squaredNorm();
    CHECK(off <= 1e-6 * z.squaredNorm());
}

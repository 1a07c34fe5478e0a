// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "mwc/error.hpp"
#include "mwc/pipeline.hpp"
#include "mwc/sensing_matrix.hpp"
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

}  // namespace

TEST_CASE("all-ones bank has a single unit entry at slice 0")
{
    MwcConfig c;
    c.m = 1;
    c.q = 1;
    c.f_p = 20e6;
    c.f_s = 20e6;
    c.m_chips = 8;
    c.L = 5;
    WaveformBank bank;
    bank.patterns = {ChipPattern{std::vector<int>(8, 1), 1.0 / 20e6}};
    const auto C = build_matrix(bank, c);
    REQUIRE(C.rows() == 1);
    REQUIRE(C.cols() == 11);
    for (int l = -5; l <= 5; ++l) {
        const Complex expect = l == 0 ? Complex(1.0) : Complex(0.0);
        CHECK(std::abs(C.entries(0, C.column_of(l)) - expect) < 1e-12);
    }
}

TEST_CASE("prototype matrix shape, entries and rank")
{
    const auto c = prototype();
    const auto bank = make_bank(BankSpec{}, c);
    const auto C = build_matrix(bank, c);
    CHECK(C.rows() == 12);
    CHECK(C.cols() == 111);
    const auto shifts = virtual_shifts(3);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 3; ++k)
            for (int l : {-55, -20, 0, 1, 37, 55})
                CHECK(std::abs(C.entries(i * 3 + k, C.column_of(l)) -
                               oracle::chip_integral_coeff(bank.patterns[static_cast<std::size_t>(i)], shifts[static_cast<std::size_t>(k)] - l)) < 1e-12);
    const auto rep = conditioning_report(C, 6);
    CHECK(rep.rank == 12);
    CHECK_FALSE(rep.coherence_flag);
    CHECK(rep.subsets_sampled == 200);
    CHECK(rep.min_subset_singular > 0.0);
    CHECK(rep.min_subset_singular <= rep.median_subset_singular);
}

TEST_CASE("q = 1 columns of a real bank pair up by conjugation")
{
    MwcConfig c = prototype();
    c.q = 1;
    c.f_s = c.f_p;
    const auto C = build_matrix(make_bank(BankSpec{}, c), c);
    for (int l = 0; l <= 55; ++l) {
        CHECK((C.entries.col(C.column_of(-l)) - C.entries.col(C.column_of(l)).conjugate()).norm() < 1e-12);
        // Entry c_{i,-l} = conj(c_{i,l}).
        for (int i = 0; i < 4; ++i) {
            const Complex cil = fourier_coeff(make_bank(BankSpec{}, c).patterns[static_cast<std::size_t>(i)], l);
            CHECK(std::abs(C.entries(i, C.column_of(l)) - std::conj(cil)) < 1e-12);
        }
    }
}

TEST_CASE("column_frequency")
{
    const auto z = column_frequency(0, 20e6, 55);
    CHECK(z.lo == doctest::Approx(-10e6));
    CHECK(z.hi == doctest::Approx(10e6));
    const auto t = column_frequency(20, 20e6, 55);
    CHECK(t.lo == doctest::Approx(390e6));
    CHECK(t.hi == doctest::Approx(410e6));
    for (int l = -55; l < 55; ++l) CHECK(column_frequency(l, 20e6, 55).hi == doctest::Approx(column_frequency(l + 1, 20e6, 55).lo));
    CHECK_THROWS_AS(column_frequency(56, 20e6, 55), InvalidArgument);
    CHECK_THROWS_AS(column_frequency(-56, 20e6, 55), InvalidArgument);
}

TEST_CASE("conditioning: identity and duplicated columns")
{
    SensingMatrix I;
    I.entries = CMatrix::Identity(5, 5);
    I.L = 2;
    const auto ri = conditioning_report(I, 3);
    CHECK(ri.mutual_coherence == doctest::Approx(0.0));
    CHECK(ri.rank == 5);
    CHECK(ri.min_subset_singular == doctest::Approx(1.0));

    SensingMatrix D = I;
    D.entries.col(4) = D.entries.col(1) * Complex(0.0, 2.0);
    const auto rd = conditioning_report(D, 2);
    CHECK(rd.coherence_flag);
    CHECK(rd.coherence_pair[0] == -1);
    CHECK(rd.coherence_pair[1] == 2);
    CHECK(rd.rank == 4);
}

TEST_CASE("scaling a waveform scales its measurement rows")
{
    // Negating pattern i negates both its rows and the matching rows of C.
    const auto c = prototype();
    auto bank = make_bank(BankSpec{}, c);
    const auto C = build_matrix(bank, c);
    for (auto& v : bank.patterns[2].chips) v = -v;
    const auto C2 = build_matrix(bank, c);
    for (int r = 0; r < 12; ++r) {
        const double sign = (r / 3 == 2) ? -1.0 : 1.0;
        CHECK((C2.entries.row(r) - sign * C.entries.row(r)).norm() < 1e-12);
    }
}

TEST_CASE("measurements follow y = C z on the prototype")
{
    const auto c = prototype();
    const auto bank = make_bank(BankSpec{}, c);
    SignalScenario s;
    s.f_max = 1e9;
    s.n_bands_max = 6;
    s.band_width_max_hz = 5e6;
    s.seed = 4;
    for (double f : {151.3e6, 401.25e6, 905e6}) {
        BandSpec b;
        b.carrier_hz = f;
        s.bands.push_back(b);
    }
    const auto acq = acquire(s, c, bank);
    const auto z = slice_oracle(acq.x, c.f_p, c.L, c.n_snapshots);
    const CMatrix Cz = acq.C.entries * z;
    CHECK(oracle::rel_err(acq.samples.rows, Cz) <= 1e-6);
}

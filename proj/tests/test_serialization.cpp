// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "mwc/error.hpp"
#include "mwc/serialization.hpp"
#include "oracles.hpp"

using namespace mwc;

TEST_CASE("scenario JSON round trip")
{
    SignalScenario s;
    s.f_max = 1e9;
    s.n_bands_max = 6;
    s.band_width_max_hz = 5e6;
    s.duration_s = 1e-5;
    s.seed = 99;
    s.snr_db = 12.5;
    BandSpec am;
    am.carrier_hz = 807.8e6;
    am.bandwidth_hz = 0.2e6;
    am.modulation = Modulation::am;
    am.mod_params.envelope_hz = 1e5;
    am.phase_rad = 0.25;
    BandSpec sine;
    sine.carrier_hz = 100e6;
    sine.amplitude = 0.5;
    s.bands = {am, sine};

    const Json j = s;
    const SignalScenario back = parse_scenario(j);
    CHECK(Json(back) == j);
    CHECK(back.bands[0].modulation == Modulation::am);
    CHECK(*back.bands[0].phase_rad == 0.25);
    CHECK_FALSE(back.bands[1].phase_rad.has_value());
    CHECK(*back.snr_db == 12.5);

    s.snr_db.reset();
    CHECK(Json(s)["snr_db"].is_null());
}

TEST_CASE("parse_scenario collects every field error with its path")
{
    const Json bad = Json::parse(R"({"f_max": "big", "band_width_max_hz": 5e6,
        "bands": [{"carrier_hz": 100e6}, {"carrier_hz": 2e9}, {"bandwidth_hz": 1}]})");
    try {
        parse_scenario(bad);
        FAIL("expected InvalidScenario");
    } catch (const InvalidScenario& e) {
        std::vector<std::string> paths;
        for (const auto& fe : e.errors()) paths.push_back(fe.path);
        auto has = [&](const std::string& p) { return std::ranges::find(paths, p) != paths.end(); };
        CHECK(has("/f_max"));
        CHECK(has("/n_bands_max"));
        CHECK(has("/bands/2/carrier_hz"));
    }

    const Json above = Json::parse(R"({"f_max": 1e9, "n_bands_max": 6, "band_width_max_hz": 5e6,
        "bands": [{"carrier_hz": 1.2e9}]})");
    try {
        parse_scenario(above);
        FAIL("expected InvalidScenario");
    } catch (const InvalidScenario& e) {
        REQUIRE(e.errors().size() == 1);
        CHECK(e.errors()[0].path == "/bands/0/carrier_hz");
    }

    CHECK_THROWS_AS(parse_scenario(Json::array()), InvalidScenario);
}

TEST_CASE("config, bank and options round trip")
{
    MwcConfig c{4, 3, 20e6, 70e6, 108, 55, 64};
    CHECK(Json(c).get<MwcConfig>().f_s == 70e6);
    const auto d = Json::parse(R"({"m": 2, "q": 2, "f_p": 10e6})").get<MwcConfig>();
    CHECK(d.f_s == 20e6);

    const auto bank = gen_random_bank(3, 16, 4, 1.0 / 20e6);
    const auto bb = Json(bank).get<WaveformBank>();
    CHECK(bb.patterns == bank.patterns);
    CHECK(*bb.seed == 4);

    const auto tb = gen_tapped_bank(bank.patterns[0], {0, 5, 9});
    const auto tbb = Json(tb).get<WaveformBank>();
    CHECK(tbb.patterns == tb.patterns);
    CHECK(tbb.taps == tb.taps);

    DetectOptions o;
    o.rel_tol = 1e-3;
    o.rule = SelectionRule::classic;
    o.conjugate_pairs = false;
    const auto ob = Json(o).get<DetectOptions>();
    CHECK(ob.rel_tol == 1e-3);
    CHECK(ob.rule == SelectionRule::classic);
    CHECK_FALSE(ob.conjugate_pairs);

    const SupportSet S({-3, 1, 3});
    CHECK(Json(S).get<SupportSet>() == S);
}

TEST_CASE("binary sample matrix round trip and header layout")
{
    std::mt19937_64 rng(1);
    SampleMatrix m;
    m.rows = oracle::random_complex(12, 64, rng);
    m.f_p = 20e6;
    m.q = 3;
    std::stringstream ss;
    write_samples_binary(ss, m);
    const std::string bytes = ss.str();
    REQUIRE(bytes.size() == 8 + 8 + 8 + 4 + 12 * 64 * 16);
    std::uint64_t rows = 0, cols = 0;
    double fp = 0.0;
    std::memcpy(&rows, bytes.data(), 8);
    std::memcpy(&cols, bytes.data() + 8, 8);
    std::memcpy(&fp, bytes.data() + 16, 8);
    CHECK(rows == 12);
    CHECK(cols == 64);
    CHECK(fp == 20e6);
    double re01 = 0.0;
    std::memcpy(&re01, bytes.data() + 28 + 16, 8);
    CHECK(re01 == m.rows(0, 1).real());

    std::stringstream in(bytes);
    const auto back = read_samples_binary(in);
    CHECK((back.rows - m.rows).norm() == 0.0);
    CHECK(back.f_p == 20e6);

    std::stringstream trunc(bytes.substr(0, 100));
    CHECK_THROWS_AS(read_samples_binary(trunc), InvalidArgument);

    std::stringstream ds;
    write_sensing_binary(ds, SensingMatrix{m.rows, 4, 3, 0, 20e6});
    CHECK_THROWS_AS(read_samples_binary(ds), InvalidArgument);
}

TEST_CASE("dense signal binary round trip")
{
    DenseSignal x;
    x.sample_rate_hz = 4.32e9;
    x.t0 = 1e-9;
    x.f_max_hz = 1e9;
    x.samples = {0.5, -1.0, 2.0, 0.0};
    std::stringstream ss;
    write_dense_binary(ss, x);
    const auto y = read_dense_binary(ss);
    CHECK(y.samples == x.samples);
    CHECK(y.sample_rate_hz == x.sample_rate_hz);
    CHECK(y.t0 == x.t0);
    CHECK(y.f_max_hz == x.f_max_hz);
}

TEST_CASE("WAV writer")
{
    std::stringstream ss;
    write_wav(ss, {0.0, 0.5, -1.0, 0.25}, 48000);
    const std::string b = ss.str();
    REQUIRE(b.size() == 44 + 8);
    CHECK(b.substr(0, 4) == "RIFF");
    CHECK(b.substr(8, 4) == "WAVE");
    std::uint32_t rate = 0;
    std::memcpy(&rate, b.data() + 24, 4);
    CHECK(rate == 48000);
    std::int16_t s2 = 0;
    std::memcpy(&s2, b.data() + 44 + 4, 2);
    CHECK(s2 == -32767);
}

TEST_CASE("holes CSV and digest")
{
    HoleMap h{{{0.0, 390e6}, {410e6, 1110e6}}};
    const auto csv = holes_csv(h);
    CHECK(csv.rfind("start_hz,end_hz\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    std::mt19937_64 rng(2);
    SampleMatrix m;
    m.rows = oracle::random_complex(4, 8, rng);
    m.f_p = 20e6;
    SampleMatrix m2 = m;
    CHECK(digest(m) == digest(m2));
    CHECK(digest(m).size() == 16);
    m2.rows(1, 1) += 1e-12;
    CHECK(digest(m) != digest(m2));
    // FNV-1a 64 of the empty string.
    CHECK(digest_bytes("") == "cbf29ce484222325");
    CHECK(digest_bytes("a") == "af63dc4c8601ec8c");
}

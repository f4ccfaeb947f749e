#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvariv/errors.hpp"
#include "pvariv/panel_data.hpp"
#include "pvariv/rng.hpp"
#include "test_util.hpp"

using namespace pvariv;

namespace {

const char* kTinyCsv =
    "unit,time,exp,gdp\n"
    "a,1990,1.0,10.0\n"
    "a,1991,2.0,11.0\n"
    "a,1992,4.0,12.0\n"
    "b,1990,3.0,20.0\n"
    "b,1991,3.0,21.0\n"
    "b,1992,3.0,22.0\n";

}  // namespace

TEST_CASE("load complete tiny csv") {
    const PanelDataset ds = parse_csv(kTinyCsv);
    CHECK(ds.n_units() == 2);
    CHECK(ds.n_periods() == 3);
    CHECK(ds.n_vars() == 2);
    CHECK(ds.unit_ids[0] == "a");
    CHECK(ds.time_ids[2] == 1992);
    CHECK(ds.value(0, 2, 0) == 4.0);
    CHECK(ds.value(1, 0, 1) == 20.0);
}

TEST_CASE("missing row makes the panel unbalanced") {
    std::string text = kTinyCsv;
    text = text.substr(0, text.rfind("b,1992"));
    try {
        parse_csv(text);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::unbalanced_panel);
    }
}

TEST_CASE("duplicate (unit,time) is rejected") {
    const std::string text = std::string(kTinyCsv) + "b,1992,9.0,9.0\n";
    try {
        parse_csv(text);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::duplicate_key);
    }
}

TEST_CASE("non-numeric cell is a parse error") {
    std::string text = kTinyCsv;
    const auto pos = text.find("4.0");
    text.replace(pos, 3, "oops");
    try {
        parse_csv(text);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::parse_error);
    }
}

TEST_CASE("load a 10 region x 40 year fixture file") {
    Rng rng(99);
    std::ostringstream csv;
    csv << "unit,time,exp,gdp\n";
    for (int i = 0; i < 10; ++i)
        for (int t = 0; t < 40; ++t)
            csv << "r" << i << ',' << 1966 + t << ',' << 100.0 + 10.0 * rng.uniform() << ','
                << 1000.0 + 100.0 * rng.uniform() << '\n';

    const auto path = std::filesystem::temp_directory_path() / "pvariv_dd350_fixture.csv";
    {
        std::ofstream out(path);
        out << csv.str();
    }
    const PanelDataset ds = load_csv(path.string());
    CHECK(ds.n_units() == 10);
    CHECK(ds.n_periods() == 40);
    CHECK(ds.n_vars() == 2);
    long long cells = 0;
    for (const auto& block : ds.data) cells += block.size();
    CHECK(cells == 400 * 2);
    std::filesystem::remove(path);
}

TEST_CASE("growth transform by hand") {
    // num = (1,2,4), den = (1,1,1), k = 1 -> (1, 2)
    const Eigen::MatrixXd block_a =
        (Eigen::MatrixXd(3, 2) << 1.0, 1.0, 2.0, 1.0, 4.0, 1.0).finished();
    const Eigen::MatrixXd block_b =
        (Eigen::MatrixXd(3, 2) << 2.0, 1.0, 2.0, 1.0, 2.0, 1.0).finished();
    const PanelDataset ds = testutil::make_panel({block_a, block_b}, {"num", "den"});

    const PanelDataset out = growth_transform(ds, {{1, "num", "den", ""}});
    CHECK(out.n_periods() == 2);
    CHECK(out.var_names[0] == "num_growth");
    CHECK(out.value(0, 0, 0) == doctest::Approx(1.0));
    CHECK(out.value(0, 1, 0) == doctest::Approx(2.0));
    // constant series -> all zeros
    CHECK(out.value(1, 0, 0) == 0.0);
    CHECK(out.value(1, 1, 0) == 0.0);
    CHECK(out.time_ids[0] == ds.time_ids[1]);
}

TEST_CASE("growth transform k=2 matches a cell-by-cell recomputation") {
    Rng rng(5);
    std::vector<Eigen::MatrixXd> blocks;
    for (int i = 0; i < 3; ++i) {
        Eigen::MatrixXd b(8, 2);
        for (int t = 0; t < 8; ++t) {
            b(t, 0) = 5.0 + rng.normal();
            b(t, 1) = 10.0 + rng.uniform();
        }
        blocks.push_back(b);
    }
    const PanelDataset ds = testutil::make_panel(blocks, {"num", "den"});
    const PanelDataset out = growth_transform(ds, {{2, "num", "den", "g"}});

    CHECK(out.n_periods() == 6);
    CHECK(out.var_names[0] == "g");
    for (int i = 0; i < 3; ++i) {
        for (int t = 0; t < 6; ++t) {
            const double expected =
                (ds.value(i, t + 2, 0) - ds.value(i, t, 0)) / ds.value(i, t, 1);
            CHECK(out.value(i, t, 0) == doctest::Approx(expected).epsilon(1e-15));
        }
    }
}

TEST_CASE("growth transform error paths") {
    const Eigen::MatrixXd good =
        (Eigen::MatrixXd(3, 2) << 1.0, 1.0, 2.0, 1.0, 4.0, 1.0).finished();
    Eigen::MatrixXd bad = good;
    bad(1, 1) = 0.0;  // zero denominator at a used lag
    const PanelDataset ds = testutil::make_panel({good, bad}, {"num", "den"});
    try {
        growth_transform(ds, {{1, "num", "den", ""}});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_denominator);
    }

    const PanelDataset ok = testutil::make_panel({good, good}, {"num", "den"});
    CHECK_THROWS_AS(growth_transform(ok, std::vector<GrowthSpec>{{1, "num", "den", ""},
                                                                 {2, "num", "den", "g2"}}),
                    Error);  // mixed horizons
    CHECK_THROWS_AS(growth_transform(ok, {{3, "num", "den", ""}}), Error);  // too few periods
}

TEST_CASE("alignment: transform then drop first period == drop then transform") {
    Rng rng(17);
    std::vector<Eigen::MatrixXd> blocks;
    for (int i = 0; i < 2; ++i) {
        Eigen::MatrixXd b(7, 2);
        for (int t = 0; t < 7; ++t) {
            b(t, 0) = 3.0 + rng.normal();
            b(t, 1) = 8.0 + rng.uniform();
        }
        blocks.push_back(b);
    }
    const PanelDataset ds = testutil::make_panel(blocks, {"num", "den"});

    PanelDataset dropped = ds;
    for (auto& b : dropped.data) b = b.bottomRows(6).eval();
    dropped.time_ids.erase(dropped.time_ids.begin());

    const PanelDataset a = growth_transform(ds, {{1, "num", "den", ""}});
    const PanelDataset b = growth_transform(dropped, {{1, "num", "den", ""}});
    for (int i = 0; i < 2; ++i)
        for (int t = 0; t < 5; ++t)
            CHECK(a.value(i, t + 1, 0) == doctest::Approx(b.value(i, t, 0)).epsilon(1e-15));
}

TEST_CASE("common aggregate instrument: equal spending, 10% national growth") {
    const Eigen::MatrixXd block =
        (Eigen::MatrixXd(2, 2) << 1.0, 10.0, 1.1, 10.0).finished();
    const PanelDataset ds = testutil::make_panel({block, block}, {"exp", "gdp"});
    const InstrumentSeries z =
        build_instrument(ds, "exp", "gdp", InstrumentMode::common_aggregate, 1);
    CHECK(z.values.rows() == 2);
    CHECK(z.values.cols() == 1);
    CHECK(z.values(0, 0) == doctest::Approx(0.2 / 20.0));  // (2.2-2.0)/20
    CHECK(z.values(0, 0) == z.values(1, 0));
}

TEST_CASE("share weighted instrument with shares (0.25, 0.75)") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    // unit a holds 25% of national spending each period, unit b 75%
    a << 25.0, 50.0, 27.5, 50.0;
    b << 75.0, 50.0, 82.5, 50.0;
    const PanelDataset ds = testutil::make_panel({a, b}, {"exp", "gdp"});
    const InstrumentSeries z =
        build_instrument(ds, "exp", "gdp", InstrumentMode::share_weighted, 1);
    const double national_growth = (110.0 - 100.0) / 100.0;  // 0.10
    CHECK(z.values(0, 0) == doctest::Approx(0.25 * national_growth));
    CHECK(z.values(1, 0) == doctest::Approx(0.75 * national_growth));
}

TEST_CASE("common aggregate is cross-sectionally constant on random data") {
    Rng rng(31);
    std::vector<Eigen::MatrixXd> blocks;
    for (int i = 0; i < 4; ++i) {
        Eigen::MatrixXd b(9, 2);
        for (int t = 0; t < 9; ++t) {
            b(t, 0) = 2.0 + rng.uniform();
            b(t, 1) = 15.0 + rng.uniform();
        }
        blocks.push_back(b);
    }
    const PanelDataset ds = testutil::make_panel(blocks, {"exp", "gdp"});
    const InstrumentSeries z =
        build_instrument(ds, "exp", "gdp", InstrumentMode::common_aggregate, 2);
    CHECK(z.values.cols() == 7);
    CHECK(z.values.allFinite());
    for (int t = 0; t < z.values.cols(); ++t)
        for (int i = 1; i < 4; ++i) CHECK(z.values(i, t) == z.values(0, t));
    CHECK(z.time_ids.size() == 7);
}

TEST_CASE("instrument error paths") {
    const Eigen::MatrixXd block =
        (Eigen::MatrixXd(2, 2) << 1.0, -10.0, 1.1, -10.0).finished();
    const PanelDataset ds = testutil::make_panel({block, block}, {"exp", "gdp"});
    try {
        build_instrument(ds, "exp", "gdp", InstrumentMode::common_aggregate, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_denominator);
    }
    const PanelDataset ok = testutil::make_panel(
        {(Eigen::MatrixXd(2, 2) << 1.0, 10.0, 1.1, 10.0).finished(),
         (Eigen::MatrixXd(2, 2) << 1.0, 10.0, 1.1, 10.0).finished()},
        {"exp", "gdp"});
    CHECK_THROWS_AS(build_instrument(ok, "nope", "gdp", InstrumentMode::common_aggregate, 1),
                    Error);
}

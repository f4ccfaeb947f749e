#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "pvariv/errors.hpp"
#include "pvariv/rng.hpp"
#include "pvariv/stats.hpp"

using namespace pvariv;

TEST_CASE("normal quantile matches reference values") {
    CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
    CHECK(norm_quantile(0.3) == doctest::Approx(-0.5244005127080409).epsilon(1e-12));
    CHECK(norm_quantile(0.999999) == doctest::Approx(4.753424308817087).epsilon(1e-12));
    CHECK(norm_quantile(1e-9) == doctest::Approx(-5.9978070150076865).epsilon(1e-12));
    CHECK_THROWS_AS(norm_quantile(0.0), Error);
    CHECK_THROWS_AS(norm_quantile(1.0), Error);
}

TEST_CASE("quantile inverts the cdf") {
    for (double p : {0.001, 0.025, 0.2, 0.5, 0.77, 0.975, 0.9999}) {
        CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    }
}

TEST_CASE("chi-square(1) critical value") {
    CHECK(chi2_1_quantile(0.95) == doctest::Approx(3.841458820694124).epsilon(1e-12));
}

TEST_CASE("Shapiro-Wilk on the exact 3-point symmetric sample") {
    const std::vector<double> x = {-1.0, 0.0, 1.0};
    const auto sw = shapiro_wilk(x);
    CHECK(sw.w == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sw.p_value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Shapiro-Wilk matches an independent implementation") {
    // expected values frozen from scipy.stats.shapiro
    SUBCASE("n=10 roughly normal sample") {
        const std::vector<double> x = {0.42, -1.31, 0.75, 2.04, -0.56,
                                       0.11, -0.98, 1.47, 0.33, -0.21};
        const auto sw = shapiro_wilk(x);
        CHECK(sw.w == doctest::Approx(0.9781601986308277).epsilon(5e-4));
        CHECK(sw.p_value == doctest::Approx(0.954566011027358).epsilon(5e-3));
    }
    SUBCASE("n=10 geometric sample, strongly non-normal") {
        const std::vector<double> x = {0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8, 25.6, 51.2};
        const auto sw = shapiro_wilk(x);
        CHECK(sw.w == doctest::Approx(0.6892414999838801).epsilon(5e-4));
        CHECK(sw.p_value == doctest::Approx(0.0006526429345883353).epsilon(5e-2));
    }
    SUBCASE("n=20 uniform grid") {
        std::vector<double> x(20);
        for (int i = 0; i < 20; ++i) x[i] = i + 1;
        const auto sw = shapiro_wilk(x);
        CHECK(sw.w == doctest::Approx(0.9603751832429884).epsilon(5e-4));
        CHECK(sw.p_value == doctest::Approx(0.5513717457916771).epsilon(2e-2));
    }
    SUBCASE("n=8 sample") {
        const std::vector<double> x = {2.1, 3.4, 1.9, 5.6, 3.3, 4.8, 2.2, 6.1};
        const auto sw = shapiro_wilk(x);
        CHECK(sw.w == doctest::Approx(0.8946186624509652).epsilon(5e-4));
        CHECK(sw.p_value == doctest::Approx(0.2581886723348995).epsilon(5e-2));
    }
}

TEST_CASE("Shapiro-Wilk edge cases") {
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{1.0, 2.0}), Error);
    CHECK_THROWS_AS(shapiro_wilk(std::vector<double>{3.0, 3.0, 3.0, 3.0}), Error);
}

TEST_CASE("rng normal moments and substream stability") {
    Rng rng(1234);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = rng.normal();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));

    CHECK(Rng::substream(7, 3) == Rng::substream(7, 3));
    CHECK(Rng::substream(7, 3) != Rng::substream(7, 4));
    CHECK(Rng::substream(7, 3) != Rng::substream(8, 3));
}

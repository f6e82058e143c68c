#include "combsep/lcc.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>
#include <vector>

using namespace combsep;

namespace
{
// Pearson coefficient by the textbook two-pass formula.
double pearson_oracle(const std::vector<double> &x, const std::vector<double> &y)
{
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double cosine_oracle(const std::vector<double> &x, const std::vector<double> &y)
{
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

double lorentzian(double f, double center, double hwhm)
{
    const double u = (f - center) / hwhm;
    return 1.0 / (1.0 + u * u);
}

AmplitudeTrace make_trace(FrequencyGrid grid, std::vector<double> values)
{
    AmplitudeTrace t;
    t.grid = grid;
    t.values = std::move(values);
    return t;
}

const CavitySpec kOpo = CavitySpec::symmetric_for_linewidth(474.7e6, 12.36e6);
} // namespace

TEST_SUITE("correlation")
{
    TEST_CASE("self correlation and positive scaling give one")
    {
        gen::for_all([](gen::Source &src, int) {
            const auto n = static_cast<std::size_t>(src.integer(2, 400));
            const auto x = src.vector(n, 0.0, 1.0);
            const double a = src.log_uniform(1e-3, 1e3);
            std::vector<double> ax(x);
            for (auto &v : ax)
                v *= a;
            for (auto kind : {Correlation::centered, Correlation::uncentered}) {
                CHECK(correlate_window(x, x, kind) == doctest::Approx(1.0).epsilon(1e-12));
                CHECK(correlate_window(x, ax, kind) == doctest::Approx(1.0).epsilon(1e-12));
            }
        });
    }

    TEST_CASE("agrees with the textbook formulas, symmetric and bounded")
    {
        gen::for_all([](gen::Source &src, int) {
            const auto n = static_cast<std::size_t>(src.integer(3, 300));
            const auto x = src.vector(n, -1.0, 2.0);
            const auto y = src.vector(n, -1.0, 2.0);
            const double rc = correlate_window(x, y, Correlation::centered);
            const double ru = correlate_window(x, y, Correlation::uncentered);
            CHECK(rc == doctest::Approx(pearson_oracle(x, y)).epsilon(1e-10));
            CHECK(ru == doctest::Approx(cosine_oracle(x, y)).epsilon(1e-10));
            CHECK(rc == correlate_window(y, x, Correlation::centered));
            CHECK(std::abs(rc) <= 1.0);
            CHECK(std::abs(ru) <= 1.0);
        });
    }

    TEST_CASE("centered form ignores offsets and flips sign under negation")
    {
        gen::for_all([](gen::Source &src, int) {
            const auto n = static_cast<std::size_t>(src.integer(3, 200));
            const auto x = src.vector(n, 0.0, 1.0);
            const auto y = src.vector(n, 0.0, 1.0);
            const double c = src.uniform(-5.0, 5.0);
            std::vector<double> shifted(y), negated(y);
            for (std::size_t i = 0; i < n; ++i) {
                shifted[i] += c;
                negated[i] = -y[i];
            }
            const double r = correlate_window(x, y);
            CHECK(correlate_window(x, shifted) == doctest::Approx(r).epsilon(1e-9));
            CHECK(correlate_window(x, negated) == doctest::Approx(-r).epsilon(1e-12));
        });
    }

    TEST_CASE("co-centred Lorentzians of different widths")
    {
        // Brute-force summation over a window of +-w around the common centre.
        const FrequencyGrid g(-3e6, 3e6, 1e3);
        std::vector<double> a(g.size()), b(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            a[i] = lorentzian(g.at(i), 0.0, 6.18e6);
            b[i] = lorentzian(g.at(i), 0.0, 21.6e6);
        }
        const double r = correlate_window(a, b);
        CHECK(r == doctest::Approx(pearson_oracle(a, b)).epsilon(1e-12));
        CHECK(r > 0.99);
        // Offset centres decorrelate under the centred form.
        for (std::size_t i = 0; i < g.size(); ++i)
            b[i] = lorentzian(g.at(i), 30e6, 21.6e6);
        CHECK(correlate_window(a, b) < 0.0);
    }

    TEST_CASE("degenerate inputs are rejected")
    {
        const std::vector<double> x{1.0, 2.0, 3.0};
        const std::vector<double> flat{2.0, 2.0, 2.0};
        const std::vector<double> zeros{0.0, 0.0, 0.0};
        CHECK_THROWS_AS(correlate_window(x, std::vector<double>{1.0, 2.0}), std::invalid_argument);
        CHECK_THROWS_AS(correlate_window(std::vector<double>{1.0}, std::vector<double>{1.0}), std::invalid_argument);
        CHECK_THROWS_AS(correlate_window(x, flat), std::invalid_argument);
        CHECK(correlate_window(x, flat, Correlation::uncentered) > 0.0);
        CHECK_THROWS_AS(correlate_window(x, zeros, Correlation::uncentered), std::invalid_argument);
    }

    TEST_CASE("correlation names round trip")
    {
        for (auto kind : {Correlation::centered, Correlation::uncentered})
            CHECK(correlation_from_string(to_string(kind)) == kind);
        CHECK_THROWS_AS(correlation_from_string("pearson"), std::invalid_argument);
    }
}

TEST_SUITE("peak detection")
{
    TEST_CASE("strict maxima above the floor, plateaus at their left edge")
    {
        const auto t = make_trace(FrequencyGrid(0.0, 9.0, 1.0), {5, 1, 3, 3, 2, 9, 4, 4, 6, 8});
        const auto set = detect_peaks(t, 0.3);
        REQUIRE(set.peaks.size() == 2u);
        CHECK(set.peaks[0].index == 2u);
        CHECK(set.peaks[1].index == 5u);
        CHECK(set.peaks[1].amplitude == 9.0);
        // Floor at 0.5 * 9 drops the plateau.
        CHECK(detect_peaks(t, 0.5).peaks.size() == 1u);
    }

    TEST_CASE("a plateau that keeps rising is not a peak")
    {
        const auto t = make_trace(FrequencyGrid(0.0, 5.0, 1.0), {0, 2, 2, 3, 1, 0});
        const auto set = detect_peaks(t);
        REQUIRE(set.peaks.size() == 1u);
        CHECK(set.peaks[0].index == 3u);
    }

    TEST_CASE("OPO comb yields one peak per resonance")
    {
        const auto tr = sample_comb_response(kOpo, FrequencyGrid(0.0, 5e9, 1e4));
        const auto set = detect_peaks(tr);
        REQUIRE(set.peaks.size() == 10u);
        for (std::size_t k = 0; k < set.peaks.size(); ++k)
            CHECK(std::abs(set.peaks[k].frequency_hz - (k + 1) * 474.7e6) <= 5e3);
    }

    TEST_CASE("argument checks")
    {
        CHECK_THROWS_AS(detect_peaks(AmplitudeTrace{}), std::invalid_argument);
        const auto t = make_trace(FrequencyGrid(0.0, 2.0, 1.0), {0, 1, 0});
        CHECK_THROWS_AS(detect_peaks(t, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(detect_peaks(t, 1.0), std::invalid_argument);
        CHECK(detect_peaks(make_trace(FrequencyGrid(0.0, 2.0, 1.0), {0, 0, 0})).peaks.empty());
    }
}

TEST_SUITE("overlap")
{
    TEST_CASE("window definitions and bounds")
    {
        const auto w = WindowConfig::fraction_of(474.7e6, 0.01);
        CHECK(w.width_hz == doctest::Approx(4.747e6));
        CHECK(w.within_linewidth_bounds(12.36e6));
        CHECK_FALSE(WindowConfig::absolute_width(2e6).within_linewidth_bounds(12.36e6));
        CHECK_FALSE(WindowConfig::absolute_width(13e6).within_linewidth_bounds(12.36e6));
        CHECK(WindowConfig::absolute_width(50e6).clamped(12.36e6).width_hz == doctest::Approx(12.36e6));
        CHECK(WindowConfig::absolute_width(1e3).clamped(12.36e6).width_hz == doctest::Approx(2.472e6));
        CHECK_THROWS_AS(WindowConfig::absolute_width(0.0), std::invalid_argument);
    }

    TEST_CASE("interpolation is linear and clamps at the ends")
    {
        const auto t = make_trace(FrequencyGrid(0.0, 3.0, 1.0), {0, 10, 20, 40});
        CHECK(interpolate(t, 0.25) == doctest::Approx(2.5));
        CHECK(interpolate(t, 2.5) == doctest::Approx(30.0));
        CHECK(interpolate(t, 1.0) == 10.0);
        CHECK(interpolate(t, -7.0) == 0.0);
        CHECK(interpolate(t, 9.0) == 40.0);
    }

    TEST_CASE("identical traces score one everywhere")
    {
        const auto opo = sample_comb_response(kOpo, FrequencyGrid(0.0, 5e9, 1e3));
        const auto scores = lcc_overlap(opo, opo, WindowConfig::fraction_of(474.7e6, 0.01));
        REQUIRE(scores.size() == 10u);
        for (const auto &s : scores) {
            CHECK(s.r == doctest::Approx(1.0).epsilon(1e-12));
            CHECK_FALSE(s.truncated);
            CHECK_FALSE(s.degenerate);
        }
    }

    TEST_CASE("scores are bitwise identical across thread counts")
    {
        const FrequencyGrid g(0.0, 10e9, 1e3);
        const auto opo = sample_comb_response(kOpo, g);
        const auto rfc = sample_comb_response(CavitySpec{1.288e9, 0.1, 0.1, 0.0}, g);
        auto w = WindowConfig::fraction_of(474.7e6, 0.01);
        w.max_lag_steps = 3;
        const auto one = lcc_overlap(opo, rfc, w, 0.5, 1);
        for (unsigned t : {2u, 5u}) {
            const auto many = lcc_overlap(opo, rfc, w, 0.5, t);
            REQUIRE(many.size() == one.size());
            for (std::size_t i = 0; i < one.size(); ++i) {
                CHECK(std::memcmp(&many[i].r, &one[i].r, sizeof(double)) == 0);
                CHECK(many[i].lag_steps == one[i].lag_steps);
            }
        }
    }

    TEST_CASE("mismatched grids go through interpolation")
    {
        const auto opo = sample_comb_response(kOpo, FrequencyGrid(0.0, 2e9, 1e3));
        const auto same = sample_comb_response(kOpo, FrequencyGrid(0.0, 2e9, 5e2));
        const auto scores = lcc_overlap(opo, same, WindowConfig::fraction_of(474.7e6, 0.01));
        for (const auto &s : scores)
            CHECK(s.r > 0.999999);
    }

    TEST_CASE("a lag search never lowers the score")
    {
        const FrequencyGrid g(0.0, 3e9, 1e3);
        const auto opo = sample_comb_response(kOpo, g);
        const auto rfc = sample_comb_response(kOpo, g, 5e4);
        auto w = WindowConfig::fraction_of(474.7e6, 0.01);
        const auto base = lcc_overlap(opo, rfc, w);
        w.max_lag_steps = 60;
        const auto lagged = lcc_overlap(opo, rfc, w);
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(lagged[i].r >= base[i].r);
            CHECK(lagged[i].r == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(lagged[i].lag_steps == 50);
        }
    }

    TEST_CASE("overlap CSV layout")
    {
        std::ostringstream os;
        write_overlap_csv(os, {OverlapScore{0, 474.7e6, 0.5, 0, false, false}});
        CHECK(os.str() == "peak_index,center_hz,R\n0,474700000,0.5\n");
    }
}

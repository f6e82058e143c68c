#include "combsep/cavity.hpp"
#include "generators.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <sstream>
#include <string>

using namespace combsep;

namespace
{
constexpr double kPi = std::numbers::pi;

// Airy transmission written directly from the mirror reflectances.
double airy_power(const CavitySpec &c, double f)
{
    const double r1 = std::sqrt(1.0 - c.t_in);
    const double r2 = std::sqrt((1.0 - c.t_out) * (1.0 - c.round_trip_loss));
    const double g = r1 * r2;
    const double s = std::sin(kPi * f / c.fsr_hz);
    return (1.0 - r1 * r1) * (1.0 - r2 * r2) / ((1.0 - g) * (1.0 - g) + 4.0 * g * s * s);
}

const CavitySpec kRfc{1.288e9, 0.10, 0.10, 0.0};
const CavitySpec kMc{1.288e9, 0.01, 0.01, 0.0};
} // namespace

TEST_SUITE("cavity")
{
    TEST_CASE("reference finesse and linewidth")
    {
        CHECK(kRfc.finesse() == doctest::Approx(29.80).epsilon(1e-3));
        CHECK(kRfc.linewidth() == doctest::Approx(43.216e6).epsilon(1e-4));
        CHECK(std::abs(kRfc.linewidth() / 43.4e6 - 1.0) < 0.01);
        CHECK(kMc.finesse() == doctest::Approx(312.58).epsilon(1e-4));
        CHECK(std::abs(kMc.finesse() / 312.0 - 1.0) < 0.01);
        CHECK(cavity_linewidth(kRfc) == kRfc.linewidth());
    }

    TEST_CASE("matched lossless cavity transmits fully on resonance")
    {
        gen::for_all([](gen::Source &src, int) {
            const double t = src.uniform(0.001, 0.9);
            const CavitySpec c{src.log_uniform(1e8, 1e10), t, t, 0.0};
            CHECK(std::abs(std::abs(transfer_amplitude(c, 0.0)) - 1.0) < 1e-12);
            CHECK(std::abs(transmission_magnitude(c, 0.0) - 1.0) < 1e-12);
        });
    }

    TEST_CASE("transfer functions match the Airy oracle")
    {
        gen::for_all([](gen::Source &src, int) {
            const CavitySpec c = src.cavity();
            const double f = src.uniform(-3.0, 3.0) * c.fsr_hz;
            const double oracle = airy_power(c, f);
            const double tc = std::norm(transfer_amplitude(c, f));
            const double tm = transmission_magnitude(c, f);
            CHECK(tc == doctest::Approx(oracle).epsilon(1e-9));
            CHECK(tm * tm == doctest::Approx(oracle).epsilon(1e-9));
        });
    }

    TEST_CASE("lossless cavity conserves power")
    {
        gen::for_all([](gen::Source &src, int) {
            CavitySpec c = src.cavity();
            c.round_trip_loss = 0.0;
            const double f = src.uniform(0.0, 2.0) * c.fsr_hz;
            const double sum = std::norm(transfer_amplitude(c, f)) + std::norm(reflection_amplitude(c, f));
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        });
    }

    TEST_CASE("lossy cavity transmits less than one on resonance")
    {
        const CavitySpec c{1e9, 0.1, 0.1, 0.02};
        CHECK(transmission_magnitude(c, 0.0) < 1.0);
        const double r1 = std::sqrt(0.9);
        const double r2 = std::sqrt(0.9 * 0.98);
        const double expected = std::sqrt((1 - r1 * r1) * (1 - r2 * r2)) / (1 - r1 * r2);
        CHECK(transmission_magnitude(c, 0.0) == doctest::Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("response is periodic in the free spectral range")
    {
        gen::for_all([](gen::Source &src, int) {
            const CavitySpec c = src.cavity();
            const double f = src.uniform(0.0, c.fsr_hz);
            const int k = src.integer(1, 30);
            CHECK(transmission_magnitude(c, f + k * c.fsr_hz) ==
                  doctest::Approx(transmission_magnitude(c, f)).epsilon(1e-9));
        });
    }

    TEST_CASE("transmission peaks at resonance and is symmetric about it")
    {
        gen::for_all([](gen::Source &src, int) {
            const CavitySpec c = src.cavity();
            const double f = src.uniform(0.0, 0.5) * c.fsr_hz;
            CHECK(transmission_magnitude(c, f) <= transmission_magnitude(c, 0.0) + 1e-15);
            CHECK(transmission_magnitude(c, f) == doctest::Approx(transmission_magnitude(c, -f)).epsilon(1e-12));
        });
    }

    TEST_CASE("numerical FWHM converges to the analytic linewidth at high finesse")
    {
        CHECK(measured_fwhm(kMc) == doctest::Approx(kMc.linewidth()).epsilon(1e-3));
        CHECK(measured_fwhm(kRfc) == doctest::Approx(kRfc.linewidth()).epsilon(1e-2));
        // Exact half-power points of the Airy function.
        const double g = kRfc.r1r2();
        const double exact = 2.0 * kRfc.fsr_hz / kPi * std::asin((1.0 - g) / (2.0 * std::sqrt(g)));
        CHECK(measured_fwhm(kRfc) == doctest::Approx(exact).epsilon(1e-9));
    }

    TEST_CASE("symmetric cavity solved from a linewidth")
    {
        const auto opo = CavitySpec::symmetric_for_linewidth(474.7e6, 12.36e6);
        CHECK(opo.t_in == opo.t_out);
        CHECK(opo.round_trip_loss == 0.0);
        CHECK(opo.t_in == doctest::Approx(0.0785).epsilon(1e-3));
        CHECK(opo.linewidth() == doctest::Approx(12.36e6).epsilon(1e-12));
        gen::for_all([](gen::Source &src, int) {
            const double fsr = src.log_uniform(1e8, 1e10);
            const double lw = fsr * src.uniform(0.001, 0.3);
            CHECK(CavitySpec::symmetric_for_linewidth(fsr, lw).linewidth() == doctest::Approx(lw).epsilon(1e-10));
        });
    }

    TEST_CASE("invalid cavities are rejected")
    {
        CHECK_THROWS_AS((CavitySpec{0.0, 0.1, 0.1, 0.0}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CavitySpec{1e9, 0.0, 0.1, 0.0}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CavitySpec{1e9, 0.1, 1.5, 0.0}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CavitySpec{1e9, 0.1, 0.1, 1.0}.validate()), std::invalid_argument);
        CHECK_THROWS_AS((CavitySpec{1e9, 1.0, 0.1, 0.0}.linewidth()), std::domain_error);
        CHECK((CavitySpec{1e9, 1.0, 0.1, 0.0}.finesse()) == 0.0);
    }
}

TEST_SUITE("grid and traces")
{
    TEST_CASE("grid includes both endpoints")
    {
        const FrequencyGrid g(0.0, 40e9, 1e3);
        CHECK(g.size() == 40'000'001u);
        CHECK(g.at(g.size() - 1) == 40e9);
        CHECK(g.position(1.5e3) == doctest::Approx(1.5));
        CHECK(FrequencyGrid(0.0, 1.0, 0.3).size() == 4u);
        CHECK_THROWS_AS(FrequencyGrid(1.0, 1.0, 0.1), std::invalid_argument);
        CHECK_THROWS_AS(FrequencyGrid(0.0, 1.0, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(FrequencyGrid(0.0, 1.0, 2.0), std::invalid_argument);
    }

    TEST_CASE("sampling is bitwise independent of thread count")
    {
        const FrequencyGrid g(0.0, 5e9, 1e4);
        const auto one = sample_comb_response(kRfc, g, 0.0, 1);
        for (unsigned t : {2u, 3u, 7u}) {
            const auto many = sample_comb_response(kRfc, g, 0.0, t);
            REQUIRE(many.values.size() == one.values.size());
            CHECK(std::memcmp(many.values.data(), one.values.data(), one.values.size() * sizeof(double)) == 0);
        }
    }

    TEST_CASE("sampled values equal the closed form, detune shifts the comb")
    {
        const FrequencyGrid g(0.0, 3e9, 1e5);
        const auto tr = sample_comb_response(kRfc, g, 2e6);
        for (std::size_t i = 0; i < g.size(); i += 997)
            CHECK(tr.values[i] == transmission_magnitude(kRfc, g.at(i) - 2e6));
        CHECK_FALSE(tr.coarse_warning);
        CHECK(sample_comb_response(kMc, g).coarse_warning == false);
        CHECK(sample_comb_response(kMc, FrequencyGrid(0.0, 3e9, 2e6)).coarse_warning);
    }

    TEST_CASE("trace CSV honours the stride")
    {
        const auto tr = sample_comb_response(kRfc, FrequencyGrid(0.0, 1e4, 1e3));
        std::ostringstream os;
        write_trace_csv(os, tr, 5);
        const std::string s = os.str();
        CHECK(s.rfind("frequency_hz,amplitude\n", 0) == 0);
        CHECK(std::count(s.begin(), s.end(), '\n') == 1 + 3);
        CHECK(s.find("\n5000,") != std::string::npos);
        CHECK_THROWS_AS(write_trace_csv(os, tr, 0), std::invalid_argument);
    }
}

TEST_SUITE("sideband comb")
{
    TEST_CASE("reference comb has 42 orders")
    {
        const SidebandComb comb{474.7e6, 20e9};
        CHECK(comb.order_count() == 42);
        CHECK(comb.tooth_count() == 84);
        const auto orders = enumerate_orders(comb);
        REQUIRE(orders.size() == 42u);
        for (std::size_t i = 0; i < orders.size(); ++i) {
            const int n = static_cast<int>(i) + 1;
            CHECK(orders[i].n == n);
            CHECK(orders[i].upper_hz == doctest::Approx(n * 474.7e6));
            CHECK(orders[i].lower_hz == doctest::Approx(-n * 474.7e6));
            CHECK(orders[i].separation_hz() == doctest::Approx(2 * n * 474.7e6));
        }
    }

    TEST_CASE("order count matches floor(bandwidth / fsr)")
    {
        gen::for_all([](gen::Source &src, int) {
            const double fsr = src.log_uniform(1e8, 2e9);
            const double bw = src.uniform(0.0, 5e10);
            const SidebandComb comb{fsr, bw};
            int brute = 0;
            while ((brute + 1) * fsr <= bw)
                ++brute;
            CHECK(comb.order_count() == brute);
            CHECK(enumerate_orders(comb).size() == static_cast<std::size_t>(brute));
        });
        CHECK_THROWS_AS(SidebandComb({0.0, 1e9}).order_count(), std::invalid_argument);
    }
}

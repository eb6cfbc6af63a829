#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "semcom/errors.hpp"
#include "semcom/link.hpp"
#include "semcom/rng.hpp"

using namespace semcom;

TEST_CASE("snr arithmetic") {
    CHECK(snr(1.0, 1.0, 1.0) == 1.0);
    CHECK(snr(0.0, 5.0, 2.0) == 0.0);
    CHECK(snr(2.0, 3.0, 1.5) == doctest::Approx(4.0));
    CHECK_THROWS_AS(snr(1.0, 1.0, 0.0), config_error);
}

TEST_CASE("capacity and dispersion") {
    CHECK(capacity(1.0) == doctest::Approx(1.0));
    CHECK(dispersion(1.0) == doctest::Approx(0.75));
    CHECK(capacity(0.0) == 0.0);
    CHECK(dispersion(0.0) == 0.0);

    // V increases monotonically toward 1
    double prev = 0.0;
    for (double g = 0.01; g < 1e6; g *= 1.7) {
        const double v = dispersion(g);
        CHECK(v > prev);
        CHECK(v < 1.0);
        prev = v;
    }
    CHECK(dispersion(1e9) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("packet error law reference values") {
    // Q(0) = 1/2 exactly where capacity meets the channel rate
    const double rc = 0.4375;
    const double gamma_half = std::exp2(rc) - 1.0;
    CHECK(std::abs(packet_error_prob(gamma_half, 1024, rc) - 0.5) < 1e-12);

    // frozen from the long-double incomplete-gamma oracle
    const double rho = packet_error_prob(0.5, 1024, 0.4375);
    CHECK(rho == doctest::Approx(5.7128083351996171e-6).epsilon(1e-12));
    const double oracle = static_cast<double>(
        oracles::packet_error_ld(0.5L, 1024.0L, 0.4375L));
    CHECK(rho == doctest::Approx(oracle).epsilon(1e-13));

    CHECK(packet_error_prob(0.0, 1024, rc) == 1.0);

    // blocklength limits: above capacity the error vanishes, below it saturates
    CHECK(packet_error_prob(1.0, 1 << 20, 0.4375) < 1e-12);
    CHECK(packet_error_prob(0.2, 1 << 20, 0.4375) > 1.0 - 1e-12);
}

TEST_CASE("erfc-based Q matches the long-double oracle to 1e-12") {
    for (double z = -8.0; z <= 8.0; z += 0.034567) {
        const double mine = q_function(z);
        const double ref = static_cast<double>(oracles::q_ld(z));
        CHECK(std::abs(mine - ref) <= 1e-12 * std::max(std::abs(ref), 1e-300));
    }
}

TEST_CASE("rho decreases strictly in gamma and crosses 1/2 at the rate threshold") {
    const double rc = 0.328125;
    const int d = 1024;
    const double gamma_th = std::exp2(rc) - 1.0;
    double prev = 1.0;
    bool crossed = false;
    int strict_pairs = 0;
    for (int k = 1; k <= 10000; ++k) {
        const double gamma = 2.0 * gamma_th * k / 10000.0;
        const double rho = packet_error_prob(gamma, d, rc);
        CHECK(rho <= prev);
        // strictness is only representable where erfc has not saturated
        const bool in_band = rho > 1e-12 && rho < 1.0 - 1e-12 &&
                             prev > 1e-12 && prev < 1.0 - 1e-12;
        if (in_band) {
            CHECK(rho < prev);
            ++strict_pairs;
        }
        if (prev > 0.5 && rho <= 0.5) {
            crossed = true;
            CHECK(std::abs(gamma - gamma_th) < 2.0 * (2.0 * gamma_th / 10000.0));
        }
        prev = rho;
    }
    CHECK(crossed);
    CHECK(strict_pairs > 2000);
}

TEST_CASE("loss sampling: determinism and degenerate powers") {
    LinkParams params{1024, 0.4375, 1.0, 1.0, 8};
    ChannelRealization chan;
    chan.model = ChannelModel::awgn;
    chan.gain2.assign(8, 1.0);

    SUBCASE("zero power means certain loss") {
        std::vector<double> powers(8, 0.0);
        const auto lost = sample_losses(chan, powers, params, 5);
        CHECK(lost.size() == 8);
    }

    SUBCASE("huge SNR means no loss") {
        std::vector<double> powers(8, 1e9);
        const auto lost = sample_losses(chan, powers, params, 5);
        CHECK(lost.empty());
    }

    SUBCASE("same key reproduces the same loss set") {
        // power at the rate threshold puts every packet at rho = 1/2
        std::vector<double> powers(8, std::exp2(0.4375) - 1.0);
        const auto a = sample_losses(chan, powers, params, 1234);
        const auto b = sample_losses(chan, powers, params, 1234);
        const auto c = sample_losses(chan, powers, params, 1235);
        CHECK(a == b);
        CHECK(a != c);
    }

    SUBCASE("length mismatch is rejected") {
        std::vector<double> powers(7, 1.0);
        CHECK_THROWS_AS(sample_losses(chan, powers, params, 1), config_error);
    }
}

TEST_CASE("empirical loss frequency matches rho within 3 standard errors") {
    LinkParams params{512, 0.5, 1.0, 1.0, 1};
    for (const double gamma : {0.30, 0.38, 0.4142, 0.45, 0.55}) {
        const double rho = packet_error_prob(gamma, 512, 0.5);
        const int n = 100000;
        ChannelRealization chan;
        chan.model = ChannelModel::awgn;
        chan.gain2.assign(1, gamma);  // with P = sigma^2 = 1, snr = gain2
        std::vector<double> powers(1, 1.0);
        int losses = 0;
        for (int k = 0; k < n; ++k)
            losses += static_cast<int>(
                sample_losses(chan, powers, params, derive_key(99, k)).size());
        const double freq = static_cast<double>(losses) / n;
        const double se = std::sqrt(std::max(rho * (1.0 - rho), 1e-12) / n);
        INFO("gamma=", gamma, " rho=", rho, " freq=", freq);
        CHECK(std::abs(freq - rho) <= 3.0 * se + 1e-9);
    }
}

TEST_CASE("rayleigh gains are unit-mean exponentials") {
    const auto chan = draw_gains(ChannelModel::rayleigh, 1000000, 2024);
    double acc = 0.0;
    for (double g : chan.gain2) {
        CHECK(g >= 0.0);
        acc += g;
    }
    const double mean = acc / chan.gain2.size();
    CHECK(std::abs(mean - 1.0) < 0.02);

    const auto awgn = draw_gains(ChannelModel::awgn, 16, 2024);
    for (double g : awgn.gain2) CHECK(g == 1.0);
}

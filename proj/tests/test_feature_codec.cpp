#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "semcom/encoder.hpp"
#include "semcom/errors.hpp"
#include "semcom/quantizer.hpp"
#include "semcom/rng.hpp"
#include "semcom/tensor.hpp"

using namespace semcom;

TEST_CASE("codebook resolution and levels") {
    const auto cb = make_codebook(-1.0, 1.0, 3);
    CHECK(cb.delta == doctest::Approx(2.0 / 7.0).epsilon(1e-15));
    CHECK(cb.num_levels() == 8);
    CHECK(cb.level(0) == -1.0);
    CHECK(cb.level(7) == 1.0);
    for (int k = 0; k + 1 < 8; ++k)
        CHECK(cb.level(k + 1) - cb.level(k) == doctest::Approx(cb.delta).epsilon(1e-13));

    const auto bytes = make_codebook(0.0, 255.0, 8);
    CHECK(bytes.delta == doctest::Approx(1.0));
    CHECK(bytes.num_levels() == 256);
    CHECK(bytes.level(17) == doctest::Approx(17.0));

    // paper operating point: R = 7 on [-1, 1]
    const auto paper = make_codebook(-1.0, 1.0, 7);
    CHECK(paper.delta == doctest::Approx(2.0 / 127.0).epsilon(1e-15));
}

TEST_CASE("codebook rejects bad configuration") {
    CHECK_THROWS_AS(make_codebook(1.0, 1.0, 3), config_error);
    CHECK_THROWS_AS(make_codebook(2.0, 1.0, 3), config_error);
    CHECK_THROWS_AS(make_codebook(-1.0, 1.0, 0), config_error);
    CHECK_THROWS_AS(make_codebook(-1.0, 1.0, 17), config_error);
}

TEST_CASE("quantize half-open cells and clamping") {
    const auto cb = make_codebook(-1.0, 1.0, 3);
    FeatureTensor y(1, 1, 3);
    y.values = {0.0, 1.5, -7.0};
    const auto [q, codes] = quantize(y, cb);
    // 0 lies in [0, 2/7), the cell of the fifth level 1/7
    CHECK(q.values[0] == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
    CHECK(codes.codes[0] == 4);
    CHECK(q.values[1] == 1.0);   // clamps to u_max
    CHECK(q.values[2] == -1.0);  // clamps to u_min

    // exact levels are fixed points
    FeatureTensor levels(1, 1, 8);
    for (int k = 0; k < 8; ++k) levels.values[k] = cb.level(k);
    const auto [ql, cl] = quantize(levels, cb);
    for (int k = 0; k < 8; ++k) {
        CHECK(ql.values[k] == levels.values[k]);
        CHECK(cl.codes[k] == k);
    }

    FeatureTensor bad(1, 1, 1);
    bad.values = {std::nan("")};
    CHECK_THROWS_AS(quantize(bad, cb), data_error);
}

TEST_CASE("dequantize endpoints and range errors") {
    const auto cb = make_codebook(-2.0, 6.0, 4);
    IndexTensor codes(1, 1, 2);
    codes.codes = {0, 15};
    const auto out = dequantize(codes, cb);
    CHECK(out.values[0] == -2.0);
    CHECK(out.values[1] == 6.0);

    codes.codes = {16, 0};
    CHECK_THROWS_AS(dequantize(codes, cb), data_error);
}

TEST_CASE("quantizer properties: idempotence, monotonicity, bound") {
    const auto cb = make_codebook(-1.3, 2.7, 5);
    Rng rng(42);
    FeatureTensor y(6, 5, 4);
    for (double& v : y.values) v = -2.0 + 6.0 * rng.uniform();
    const auto [q1, c1] = quantize(y, cb);
    const auto [q2, c2] = quantize(q1, cb);
    CHECK(q2.values == q1.values);

    // monotone pairs
    for (int k = 0; k + 1 < static_cast<int>(y.values.size()); ++k) {
        const double a = std::min(y.values[k], y.values[k + 1]);
        const double b = std::max(y.values[k], y.values[k + 1]);
        FeatureTensor pair(1, 1, 2);
        pair.values = {a, b};
        const auto [qp, cp] = quantize(pair, cb);
        CHECK(qp.values[0] <= qp.values[1]);
    }

    // |Q(y) - y| <= delta/2 inside the representable span
    for (int k = 0; k < 200; ++k) {
        const double v =
            cb.u_min - 0.5 * cb.delta + (cb.u_max - cb.u_min + cb.delta) * k / 200.0;
        FeatureTensor one(1, 1, 1);
        one.values = {v};
        const auto [qv, cv] = quantize(one, cb);
        CHECK(std::abs(qv.values[0] - v) <= 0.5 * cb.delta * (1 + 1e-12));
    }

    // round trip through codes lands within delta/2 of the clamped input
    const auto back = dequantize(c1, cb);
    for (std::size_t n = 0; n < y.values.size(); ++n) {
        const double clamped = std::clamp(y.values[n], cb.u_min, cb.u_max);
        CHECK(std::abs(back.values[n] - clamped) <= 0.5 * cb.delta * (1 + 1e-12));
    }
}

TEST_CASE("identity encoder is an exact bijection") {
    Rng rng(7);
    FeatureTensor img(8, 8, 3);
    for (double& v : img.values) v = 255.0 * rng.uniform();
    const IdentityBlockSpec spec{2};
    const FeatureTensor feat = encode(EncoderSpec{spec}, img, 0);
    CHECK(feat.width == 4);
    CHECK(feat.height == 4);
    CHECK(feat.channels == 12);
    const FeatureTensor back = decode(EncoderSpec{spec}, feat);
    CHECK(back.values == img.values);

    // all-zero image maps to the all-zero feature (the erased-value fill)
    const FeatureTensor zero = encode(EncoderSpec{spec}, FeatureTensor::zeros(8, 8, 3), 0);
    for (double v : zero.values) CHECK(v == 0.0);

    CHECK_THROWS_AS(encode(EncoderSpec{IdentityBlockSpec{3}}, img, 0), config_error);
}

TEST_CASE("gaussian source sampling") {
    GaussianSourceSpec spec;
    spec.width = 4;
    spec.height = 4;
    spec.channels = 2;
    spec.mean = 1.25;
    spec.variance = 0.0;
    const FeatureTensor y = encode(EncoderSpec{spec}, FeatureTensor(), 99);
    for (double v : y.values) CHECK(v == 1.25);

    // decode is the identity on features
    const FeatureTensor same = decode(EncoderSpec{spec}, y);
    CHECK(same.values == y.values);

    // moment check for the AR(1) field
    GaussianSourceSpec ar;
    ar.width = 16;
    ar.height = 16;
    ar.channels = 1;
    ar.mean = 0.0;
    ar.rho_corr = 0.8;
    double acc = 0.0, acc2 = 0.0, lag = 0.0;
    const int reps = 400;
    for (int r = 0; r < reps; ++r) {
        const FeatureTensor s = encode(EncoderSpec{ar}, FeatureTensor(), 1000 + r);
        for (double v : s.values) {
            acc += v;
            acc2 += v * v;
        }
        for (int i = 0; i + 1 < 16; ++i)
            for (int j = 0; j < 16; ++j) lag += s.at(i, j, 0) * s.at(i + 1, j, 0);
    }
    // spatial correlation shrinks the effective sample size: the per-field
    // mean has std ~0.47, so 400 fields put a ~0.024 standard error on it
    const double n = reps * 256.0;
    CHECK(std::abs(acc / n) < 0.08);
    CHECK(acc2 / n == doctest::Approx(1.0).epsilon(0.05));
    CHECK(lag / (reps * 240.0) == doctest::Approx(0.8).epsilon(0.05));

    GaussianSourceSpec bad = ar;
    bad.rho_corr = 1.0;
    CHECK_THROWS_AS(encode(EncoderSpec{bad}, FeatureTensor(), 0), config_error);
}

TEST_CASE("AR(1) samples realize the separable grid covariance") {
    GaussianSourceSpec ar;
    ar.width = 12;
    ar.height = 12;
    ar.channels = 1;
    ar.mean = 0.0;
    ar.rho_corr = 0.7;
    const double rho = 0.7;

    // empirical cov at a handful of (di, dj) offsets vs rho^(|di|+|dj|)
    const int reps = 3000;
    const std::pair<int, int> lags[] = {{0, 1}, {2, 0}, {1, 1}, {0, 3}, {2, 2}};
    double acc[5] = {0, 0, 0, 0, 0};
    long counts[5] = {0, 0, 0, 0, 0};
    for (int r = 0; r < reps; ++r) {
        const FeatureTensor s = encode(EncoderSpec{ar}, FeatureTensor(), 40000 + r);
        for (int k = 0; k < 5; ++k) {
            const auto [di, dj] = lags[k];
            for (int i = 0; i + di < 12; ++i)
                for (int j = 0; j + dj < 12; ++j) {
                    acc[k] += s.at(i, j, 0) * s.at(i + di, j + dj, 0);
                    ++counts[k];
                }
        }
    }
    for (int k = 0; k < 5; ++k) {
        const auto [di, dj] = lags[k];
        const double expect = std::pow(rho, di + dj);
        const double got = acc[k] / counts[k];
        INFO("lag (", di, ",", dj, ")");
        CHECK(std::abs(got - expect) < 0.03);
    }
}

TEST_CASE("tensor binary file round trip") {
    Rng rng(3);
    FeatureTensor t(5, 3, 2);
    for (double& v : t.values) v = rng.normal();
    const std::string path =
        (std::filesystem::temp_directory_path() / "semcom_tensor_test.bin").string();
    write_tensor(path, t);
    const FeatureTensor back = read_tensor(path);
    CHECK(back.width == t.width);
    CHECK(back.height == t.height);
    CHECK(back.channels == t.channels);
    CHECK(back.values == t.values);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(read_tensor("/nonexistent/semcom.bin"), data_error);
}

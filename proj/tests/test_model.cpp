#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

#include "sntk/errors.hpp"
#include "sntk/model.hpp"
#include "sntk/numerics.hpp"

using namespace sntk;

namespace {

std::vector<double> random_unit(RngStream& rng, std::size_t d) {
    std::vector<double> x(d);
    double norm_sq = 0.0;
    for (auto& v : x) {
        v = rng.next_gaussian();
        norm_sq += v * v;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (auto& v : x) v *= inv;
    return x;
}

ModelState with_bias(ModelState m, double bias) {
    for (auto& b : m.b) b = bias;
    return m;
}

}  // namespace

TEST_SUITE("model") {

TEST_CASE("init: constant bias, signs, determinism") {
    const ModelState m = init({InitKind::standard, 0.5, 7}, 3, 4);
    CHECK(m.m == 3);
    CHECK(m.d == 4);
    for (double b : m.b) CHECK(b == 0.5);
    for (auto s : m.a) CHECK((s == 1 || s == -1));

    const ModelState again = init({InitKind::standard, 0.5, 7}, 3, 4);
    CHECK(m.W == again.W);
    CHECK(m.b == again.b);
    CHECK(m.a == again.a);

    const ModelState other = init({InitKind::standard, 0.5, 8}, 3, 4);
    CHECK(m.W != other.W);
}

TEST_CASE("init: symmetric halves mirror each other") {
    const ModelState m = init({InitKind::symmetric, 0.25, 11}, 2, 3);
    REQUIRE(m.m == 4);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(m.W[2 * 3 + k] == m.W[0 * 3 + k]);
        CHECK(m.W[3 * 3 + k] == m.W[1 * 3 + k]);
    }
    CHECK(m.a[2] == -m.a[0]);
    CHECK(m.a[3] == -m.a[1]);
    for (double b : m.b) CHECK(b == 0.25);
}

TEST_CASE("forward: single-neuron hand case") {
    ModelState m;
    m.m = 1;
    m.d = 2;
    m.W = {1.0, 0.0};
    m.b = {0.0};
    m.a = {1};
    CHECK(forward(m, std::vector<double>{1.0, 0.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(forward(m, std::vector<double>{1.0, 0.0, 0.0}),
                    dimension_mismatch);
}

TEST_CASE("symmetric initialization outputs zero") {
    const ModelState m = init({InitKind::symmetric, 0.4, 21}, 256, 8);
    RngStream rng(22, streams::test_inputs);
    for (int rep = 0; rep < 100; ++rep) {
        const auto x = random_unit(rng, 8);
        CHECK(std::abs(forward(m, x)) <= 1e-8);
    }
}

TEST_CASE("forward matches the naive oracle") {
    const ModelState m = init({InitKind::standard, 0.3, 33}, 64, 8);
    RngStream rng(34, streams::test_inputs);
    for (int rep = 0; rep < 20; ++rep) {
        const auto x = random_unit(rng, 8);
        const double got = forward(m, x);
        const double want = oracles::naive_forward(m, x.data());
        CHECK(std::abs(got - want) <= 1e-12 * (1.0 + std::abs(want)));
    }
}

TEST_CASE("activation mask saturation and boundary") {
    const ModelState base = init({InitKind::standard, 0.0, 41}, 32, 6);
    const Dataset data = gen_linear_teacher(6, 10, RngStream(42, streams::data_points));

    const ActivationMask none = activation_mask(with_bias(base, 1e6), data);
    const ActivationMask all = activation_mask(with_bias(base, -1e6), data);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(none.column_popcount(i) == 0);
        CHECK(all.column_popcount(i) == 32);
    }

    // Boundary counts as active: w = x, b = 1 gives w^T x - b = 0 exactly
    // only with exact arithmetic, so force it via b = dot.
    ModelState m;
    m.m = 1;
    m.d = 6;
    m.W.assign(data.column(0), data.column(0) + 6);
    m.b = {data.gram(0, 0)};
    m.a = {1};
    const ActivationMask mask = activation_mask(m, data);
    CHECK(mask.get(0, 0));
}

TEST_CASE("activation density near Q(1) at B = 1") {
    const ModelState m = init({InitKind::standard, 1.0, 4242}, 8192, 16);
    const Dataset data =
        gen_linear_teacher(16, 16, RngStream(4243, streams::data_points));
    const ActivationMask mask = activation_mask(m, data);
    double frac = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i)
        frac += double(mask.column_popcount(i));
    frac /= double(m.m) * double(data.size());
    CHECK(std::abs(frac - 0.158655) <= 0.010);
}

TEST_CASE("mask is invariant under positive rescaling of (w_r, b_r)") {
    ModelState m = init({InitKind::standard, 0.7, 51}, 24, 5);
    const Dataset data = gen_linear_teacher(5, 12, RngStream(52, streams::data_points));
    const ActivationMask before = activation_mask(m, data);
    for (std::size_t r = 0; r < m.m; ++r) {
        const double t = 0.25 + double(r % 7);
        for (std::size_t k = 0; k < m.d; ++k) m.W[r * m.d + k] *= t;
        m.b[r] *= t;
    }
    const ActivationMask after = activation_mask(m, data);
    for (std::size_t r = 0; r < m.m; ++r)
        for (std::size_t i = 0; i < data.size(); ++i)
            CHECK(before.get(r, i) == after.get(r, i));
}

TEST_CASE("loss: zero fits, symmetric half-norm, naive agreement") {
    // Zero-output network against zero responses.
    ModelState m = init({InitKind::standard, 1e6, 61}, 16, 4);
    std::vector<double> cols;
    std::vector<double> ys;
    const Dataset base = gen_linear_teacher(4, 6, RngStream(62, streams::data_points));
    for (std::size_t i = 0; i < base.size(); ++i)
        for (std::size_t k = 0; k < 4; ++k) cols.push_back(base.column(i)[k]);
    ys.assign(base.size(), 0.0);
    DatasetMeta meta;
    meta.y_max = 1.0;
    const Dataset zeros(4, base.size(), cols, ys, meta);
    CHECK(loss(m, zeros) == 0.0);

    // Symmetric init: loss is half the response norm.
    const ModelState sym = init({InitKind::symmetric, 0.2, 63}, 128, 4);
    double half_norm = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
        half_norm += base.response(i) * base.response(i);
    half_norm *= 0.5;
    CHECK(std::abs(loss(sym, base) - half_norm) <= 1e-9);

    const ModelState rnd = init({InitKind::standard, 0.4, 64}, 48, 4);
    CHECK(std::abs(loss(rnd, base) - oracles::naive_loss(rnd, base)) <=
          1e-12 * (1.0 + oracles::naive_loss(rnd, base)));
}

TEST_CASE("gradients: inactive network, norm bound, mask consistency") {
    const Dataset data = gen_linear_teacher(6, 10, RngStream(72, streams::data_points));
    const ModelState dead = with_bias(init({InitKind::standard, 0.0, 71}, 20, 6), 1e6);
    const Gradients gz = gradients(dead, data);
    for (double v : gz.gW) CHECK(v == 0.0);
    for (double v : gz.gb) CHECK(v == 0.0);

    const ModelState m = init({InitKind::standard, 0.5, 73}, 40, 6);
    const Gradients g = gradients(m, data);
    const auto f = forward_all(m, data);
    double res_norm = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double r = f[i] - data.response(i);
        res_norm += r * r;
    }
    res_norm = std::sqrt(res_norm);
    const double bound = std::sqrt(double(data.size()) / double(m.m)) * res_norm;
    const ActivationMask mask = activation_mask(m, data);
    for (std::size_t r = 0; r < m.m; ++r) {
        double row_norm = 0.0;
        for (std::size_t k = 0; k < m.d; ++k)
            row_norm += g.gW[r * m.d + k] * g.gW[r * m.d + k];
        row_norm = std::sqrt(row_norm);
        CHECK(row_norm <= bound * (1.0 + 1e-12));
        CHECK(std::abs(g.gb[r]) <= bound * (1.0 + 1e-12));

        bool any_active = false;
        for (std::size_t i = 0; i < data.size(); ++i)
            any_active = any_active || mask.get(r, i);
        if (!any_active) {
            CHECK(row_norm == 0.0);
            CHECK(g.gb[r] == 0.0);
        }
    }
}

TEST_CASE("gradients match central finite differences away from kinks") {
    const Dataset data = gen_linear_teacher(6, 8, RngStream(82, streams::data_points));
    ModelState m = init({InitKind::standard, 0.3, 81}, 32, 6);
    const Gradients g = gradients(m, data);
    const double h = 1e-5;
    int tested = 0;
    for (std::size_t r = 0; r < m.m; ++r) {
        bool near_kink = false;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double z = -m.b[r];
            for (std::size_t k = 0; k < m.d; ++k)
                z += m.W[r * m.d + k] * data.column(i)[k];
            near_kink = near_kink || std::abs(z) <= 1e-3;
        }
        if (near_kink) continue;
        for (std::size_t k = 0; k < m.d; ++k) {
            const double saved = m.W[r * m.d + k];
            m.W[r * m.d + k] = saved + h;
            const double lp = loss(m, data);
            m.W[r * m.d + k] = saved - h;
            const double lm = loss(m, data);
            m.W[r * m.d + k] = saved;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = g.gW[r * m.d + k];
            if (std::abs(an) < 1e-7) continue;
            CHECK(std::abs(fd - an) / std::abs(an) <= 1e-5);
            ++tested;
        }
        // Bias coordinate of the same neuron.
        const double saved = m.b[r];
        m.b[r] = saved + h;
        const double lp = loss(m, data);
        m.b[r] = saved - h;
        const double lm = loss(m, data);
        m.b[r] = saved;
        const double fd = (lp - lm) / (2.0 * h);
        if (std::abs(g.gb[r]) >= 1e-7)
            CHECK(std::abs(fd - g.gb[r]) / std::abs(g.gb[r]) <= 1e-5);
    }
    CHECK(tested > 10);
}

TEST_CASE("param_distance") {
    const ModelState m = init({InitKind::standard, 0.1, 91}, 12, 5);
    const ParamDistance zero = param_distance(m, m);
    CHECK(zero.rw_max == 0.0);
    CHECK(zero.rb_max == 0.0);
    CHECK(zero.fro == 0.0);

    ModelState shifted = m;
    shifted.b[3] += 0.3;
    const ParamDistance one = param_distance(shifted, m);
    CHECK(one.rw_max == 0.0);
    CHECK(one.rb_max == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(one.fro == doctest::Approx(0.3).epsilon(1e-14));

    // Random perturbation against a naive recomputation.
    RngStream rng(92, streams::test_inputs);
    ModelState moved = m;
    for (auto& w : moved.W) w += 0.01 * rng.next_gaussian();
    for (auto& b : moved.b) b += 0.01 * rng.next_gaussian();
    const ParamDistance d = param_distance(moved, m);
    double fro_sq = 0.0, rw = 0.0, rb = 0.0;
    for (std::size_t r = 0; r < m.m; ++r) {
        double dw_sq = 0.0;
        for (std::size_t k = 0; k < m.d; ++k) {
            const double dk = moved.W[r * m.d + k] - m.W[r * m.d + k];
            dw_sq += dk * dk;
        }
        const double db = moved.b[r] - m.b[r];
        rw = std::max(rw, std::sqrt(dw_sq));
        rb = std::max(rb, std::abs(db));
        fro_sq += dw_sq + db * db;
    }
    CHECK(std::abs(d.rw_max - rw) <= 1e-12);
    CHECK(std::abs(d.rb_max - rb) <= 1e-12);
    CHECK(std::abs(d.fro - std::sqrt(fro_sq)) <= 1e-12);

    ModelState wrong = init({InitKind::standard, 0.1, 91}, 13, 5);
    CHECK_THROWS_AS(param_distance(wrong, m), dimension_mismatch);
}

TEST_CASE("checkpoint round trip and corruption") {
    const ModelState m = init({InitKind::symmetric, 0.9, 101}, 17, 6);
    const std::string path =
        (std::filesystem::temp_directory_path() / "sntk_test_ckpt.bin").string();
    save_checkpoint(m, path);
    const ModelState back = load_checkpoint(path);
    CHECK(back.m == m.m);
    CHECK(back.d == m.d);
    CHECK(back.W == m.W);
    CHECK(back.b == m.b);
    CHECK(back.a == m.a);

    {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << "NOPE garbage";
    }
    CHECK_THROWS_AS(load_checkpoint(path), format_error);
    CHECK_THROWS_AS(load_checkpoint("/no/such/checkpoint.bin"), io_error);
    std::remove(path.c_str());
}

}  // TEST_SUITE

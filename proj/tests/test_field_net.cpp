#include <doctest.h>

#include "mnav/error.hpp"
#include "mnav/field_net.hpp"
#include "mnav/kernels.hpp"
#include "mnav/rng.hpp"

using namespace mnav;

namespace {

NetConfig tiny_config() {
    NetConfig cfg;
    cfg.n_fourier = 6;
    cfg.hidden_width = 10;
    cfg.n_blocks = 2;
    cfg.a = 3;
    cfg.b = 4;
    cfg.fourier_scale = 2.0;
    cfg.seed = 42;
    return cfg;
}

Subnetwork tiny_net(uint64_t seed = 42) {
    NetConfig cfg = tiny_config();
    cfg.seed = seed;
    return Subnetwork(1, cfg, {{0.0, 0.0}, {4.0, 3.0}}, 0.6);
}

}  // namespace

TEST_CASE("normalization maps the box into centered coordinates") {
    const NetConfig cfg = tiny_config();
    const Subnetwork net(0, cfg, {{0.0, 0.0}, {10.0, 10.0}}, 0.6);
    const Vec2 a = normalize(net, {0.0, 0.0});
    CHECK(a.x == doctest::Approx(-0.5));
    CHECK(a.y == doctest::Approx(-0.5));
    const Vec2 b = normalize(net, {5.0, 5.0});
    CHECK(b.x == 0.0);
    CHECK(b.y == 0.0);
    const Vec2 c = normalize(net, {10.0, 10.0});
    CHECK(c.x == doctest::Approx(0.5));
    CHECK(c.y == doctest::Approx(0.5));
    CHECK_THROWS_AS(normalize(net, {11.0, 5.0}), DomainError);

    // anisotropic box: one shared scale, center at the origin
    const Subnetwork net2(0, cfg, {{0.0, 0.0}, {8.0, 4.0}}, 0.6);
    const Vec2 d = normalize(net2, {8.0, 4.0});
    CHECK(d.x == doctest::Approx(0.5));
    CHECK(d.y == doctest::Approx(0.25));
}

TEST_CASE("metric head: exact form and axioms") {
    const std::vector<double> x{1.0, 0.0, 0.0, 2.0};
    const std::vector<double> y{0.0, 0.0, 0.0, 0.0};
    CHECK(metric_exact(x, y, 2, 2) == 3.0);
    CHECK(metric_exact(x, x, 2, 2) == 0.0);

    Rng rng(7);
    for (int it = 0; it < 10000; ++it) {
        std::vector<double> a(12), b(12), c(12);
        for (int j = 0; j < 12; ++j) {
            a[j] = rng.uniform(-2.0, 2.0);
            b[j] = rng.uniform(-2.0, 2.0);
            c[j] = rng.uniform(-2.0, 2.0);
        }
        const double ab = metric_exact(a, b, 3, 4);
        const double ba = metric_exact(b, a, 3, 4);
        const double ac = metric_exact(a, c, 3, 4);
        const double cb = metric_exact(c, b, 3, 4);
        CHECK(ab >= 0.0);
        CHECK(ab == ba);
        CHECK(ab <= ac + cb + 1e-15);
    }
}

TEST_CASE("fresh blocks pass their input through (alpha = 0)") {
    const Subnetwork net = tiny_net();
    const Vec2 q{0.21, -0.13};
    const std::vector<double> lat = encode(net, q);

    // hand-computed: wout * (wp * gamma + bp) + bout, blocks skipped
    const NetConfig& cfg = net.config();
    const int F = cfg.n_fourier, W = cfg.hidden_width, AB = cfg.latent_size();
    std::vector<double> qcol{q.x, q.y};
    std::vector<double> z(F);
    kernels::matmul_nn(net.fourier_matrix().data(), qcol.data(), z.data(), F, 2, 1);
    std::vector<double> gamma(2 * F);
    for (int i = 0; i < F; ++i) {
        gamma[i] = std::sin(2.0 * M_PI * z[i]);
        gamma[F + i] = std::cos(2.0 * M_PI * z[i]);
    }
    auto tensor = [&](const char* name) {
        for (const auto& t : net.layout())
            if (t.name == name) return net.parameters().data() + t.offset;
        FAIL("missing tensor");
        return net.parameters().data();
    };
    std::vector<double> h(W);
    kernels::matmul_nn(tensor("wp"), gamma.data(), h.data(), W, 2 * F, 1);
    const double* bp = tensor("bp");
    for (int i = 0; i < W; ++i) h[i] += bp[i];
    std::vector<double> out(AB);
    kernels::matmul_nn(tensor("wout"), h.data(), out.data(), AB, W, 1);
    const double* bout = tensor("bout");
    for (int i = 0; i < AB; ++i) out[i] += bout[i];

    REQUIRE(lat.size() == out.size());
    for (size_t i = 0; i < out.size(); ++i) CHECK(lat[i] == out[i]);
}

TEST_CASE("gamma components lie in [-1, 1]") {
    const Subnetwork net = tiny_net();
    ad::Tape tape;
    const TapeNet tnet(tape, net);
    Rng rng(3);
    std::vector<double> q(2 * 16);
    for (auto& v : q) v = rng.uniform(-0.5, 0.5);
    const auto enc = tnet.encode_multi(tape.leaf({2, 16}, q, ad::Role::Input), {});
    for (double v : tape.values(enc.gamma)) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("travel time is a symmetric pseudometric vanishing on the diagonal") {
    const Subnetwork net = tiny_net();
    const Vec2 a{1.2, 0.7}, b{3.1, 2.2};
    CHECK(travel_time(net, a, a) == 0.0);
    CHECK(travel_time(net, a, b) == travel_time(net, b, a));
    CHECK(travel_time(net, a, b) > 0.0);
    CHECK_THROWS_AS(travel_time(net, a, {9.0, 0.5}), DomainError);
}

TEST_CASE("input gradients of the evaluation-mode field match finite differences") {
    const Subnetwork net = tiny_net(31);
    Rng rng(100);
    EncodeWorkspace ws;
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
        const Vec2 a{rng.uniform(0.3, 3.7), rng.uniform(0.3, 2.7)};
        const Vec2 b{rng.uniform(0.3, 3.7), rng.uniform(0.3, 2.7)};
        if ((a - b).norm() < 0.1) continue;
        SpeedQuery sq;
        if (!try_speed_query(net, a, b, sq, ws)) continue;
        ++checked;

        // central differences in normalized coordinates (h = 1e-5)
        const double h = 1e-5;
        const double s = net.scale();
        auto T = [&](Vec2 x, Vec2 y) { return travel_time(net, x, y) / net.time_scale(); };
        const Vec2 hx{h * s, 0.0}, hy{0.0, h * s};
        const Vec2 fd_g{(T(a, b + hx) - T(a, b - hx)) / (2 * h), (T(a, b + hy) - T(a, b - hy)) / (2 * h)};
        const Vec2 fd_s{(T(a + hx, b) - T(a - hx, b)) / (2 * h), (T(a + hy, b) - T(a - hy, b)) / (2 * h)};
        for (const auto& [got, want] : {std::pair{sq.grad_g.x, fd_g.x},
                                        std::pair{sq.grad_g.y, fd_g.y},
                                        std::pair{sq.grad_s.x, fd_s.x},
                                        std::pair{sq.grad_s.y, fd_s.y}}) {
            const double rel = std::fabs(got - want) / std::max(1e-6, std::fabs(want));
            worst = std::max(worst, rel);
        }
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("doubling the head scale halves the predicted speed") {
    Subnetwork net = tiny_net(8);
    const Vec2 a{1.0, 1.0}, b{2.5, 2.0};
    const SpeedQuery before = predicted_speed(net, a, b);
    for (const auto& t : net.layout()) {
        if (t.name == "wout" || t.name == "bout")
            for (int i = 0; i < t.size(); ++i) net.parameters()[t.offset + i] *= 2.0;
    }
    const SpeedQuery after = predicted_speed(net, a, b);
    CHECK(after.speed_g == doctest::Approx(before.speed_g / 2.0).epsilon(1e-12));
    CHECK(after.speed_s == doctest::Approx(before.speed_s / 2.0).epsilon(1e-12));
    CHECK(after.travel_seconds == doctest::Approx(2.0 * before.travel_seconds).epsilon(1e-12));
}

TEST_CASE("train-mode surrogate stays close to the exact metric") {
    const Subnetwork net = tiny_net(9);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        const Vec2 a{rng.uniform(0.2, 3.8), rng.uniform(0.2, 2.8)};
        const Vec2 b{rng.uniform(0.2, 3.8), rng.uniform(0.2, 2.8)};
        const double exact = travel_time(net, a, b) / net.time_scale();
        const double train = travel_time_train_normalized(net, a, b);
        CHECK(train >= exact - 1e-12);
        CHECK(train <= exact * std::pow(net.config().b, 1.0 / 16.0) + 1e-12);
    }
}

TEST_CASE("tape encode agrees with the plain batched evaluation") {
    const Subnetwork net = tiny_net(21);
    Rng rng(77);
    const int m = 5;
    std::vector<Vec2> pts(m);
    std::vector<double> q(2 * static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) {
        pts[i] = {rng.uniform(-0.4, 0.4), rng.uniform(-0.3, 0.3)};
        q[i] = pts[i].x;
        q[static_cast<size_t>(m) + i] = pts[i].y;
    }
    EncodeWorkspace ws;
    std::vector<double> plain;
    encode_columns(net, pts, false, plain, ws);

    ad::Tape tape;
    const TapeNet tnet(tape, net);
    const auto enc = tnet.encode_multi(tape.leaf({2, m}, q, ad::Role::Input), {});
    const auto taped = tape.values(enc.value);
    REQUIRE(taped.size() == plain.size());
    for (size_t i = 0; i < plain.size(); ++i)
        CHECK(taped[i] == doctest::Approx(plain[i]).epsilon(1e-12));
}

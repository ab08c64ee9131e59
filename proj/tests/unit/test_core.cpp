#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "doctest.h"
#include "seeto/embedder.hpp"
#include "seeto/error.hpp"
#include "seeto/problems.hpp"
#include "seeto/types.hpp"

using namespace seeto;

namespace {

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

TaskState random_state(std::size_t frames, std::size_t h, std::size_t w, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    TaskState s;
    s.height = h;
    s.width = w;
    for (std::size_t t = 0; t < frames; ++t) {
        std::vector<double> f(h * w);
        for (auto& x : f) x = n(rng);
        s.frames.push_back(f);
    }
    return s;
}

LatentSeries series(std::vector<std::vector<double>> vs) { return {"", std::move(vs)}; }

}  // namespace

TEST_CASE("dominance examples") {
    CHECK(dominates(v({1, 2}), v({2, 3})));
    CHECK_FALSE(dominates(v({1, 2}), v({1, 2})));
    CHECK_FALSE(dominates(v({1, 3}), v({2, 2})));
    CHECK_THROWS_AS((void)dominates(v({1, 2}), v({1, 2, 3})), UsageError);
}

TEST_CASE("dominance is a strict partial order") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> d(0, 3);
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({double(d(rng)), double(d(rng)), double(d(rng))});
    for (const auto& a : pts) {
        CHECK_FALSE(dominates(a, a));
        for (const auto& b : pts) {
            if (dominates(a, b)) CHECK_FALSE(dominates(b, a));
            for (const auto& c : pts) {
                if (dominates(a, b) && dominates(b, c)) CHECK(dominates(a, c));
            }
        }
    }
}

TEST_CASE("normalization examples and round trip") {
    const auto b = default_calibration_bounds();
    REQUIRE(b.dim() == 5);
    CHECK(normalize_decision(b.lower(), b) == std::vector<double>(5, 0.0));
    CHECK(normalize_decision(b.upper(), b) == std::vector<double>(5, 1.0));
    // porsl is the second parameter, range [0.5, 2].
    auto x = b.lower();
    x[1] = 1.25;
    CHECK(normalize_decision(x, b)[1] == doctest::Approx(0.5).epsilon(1e-15));

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> raw(5);
        for (std::size_t k = 0; k < 5; ++k) raw[k] = b.lower()[k] + u(rng) * (b.upper()[k] - b.lower()[k]);
        const auto back = denormalize_decision(normalize_decision(raw, b), b);
        for (std::size_t k = 0; k < 5; ++k) worst = std::max(worst, std::abs(back[k] - raw[k]) / std::abs(raw[k]));
    }
    CHECK(worst < 1e-12);

    auto outside = b.upper();
    outside[0] *= 2;
    CHECK_THROWS_AS((void)normalize_decision(outside, b), UsageError);
    CHECK_THROWS_AS(Bounds({1.0}, {1.0}), UsageError);
}

TEST_CASE("task state validation") {
    TaskState s;
    s.height = 2;
    s.width = 2;
    CHECK_THROWS_AS(s.validate(), UsageError);
    s.frames = {{1, 2, 3, 4}, {1, 2, 3}};
    CHECK_THROWS_AS(s.validate(), UsageError);
    s.frames = {{1, 2, 3, NAN}};
    CHECK_THROWS_AS(s.validate(), UsageError);
    s.frames = {{1, 2, 3, 4}, {3, 4, 5, 6}};
    CHECK_NOTHROW(s.validate());
    CHECK(s.mean_frame() == v({2, 3, 4, 5}));
}

TEST_CASE("embedder reconstructs data in an affine subspace exactly") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    const Eigen::Index dim = 12, q = 3;
    const Eigen::MatrixXd span = Eigen::MatrixXd::NullaryExpr(dim, q, [&] { return n(rng); });
    const Eigen::VectorXd offset = Eigen::VectorXd::NullaryExpr(dim, [&] { return n(rng); });
    TaskState s;
    s.height = 3;
    s.width = 4;
    for (int t = 0; t < 40; ++t) {
        const Eigen::VectorXd c = Eigen::VectorXd::NullaryExpr(q, [&] { return n(rng); });
        const Eigen::VectorXd x = offset + span * c;
        s.frames.emplace_back(x.data(), x.data() + dim);
    }
    const std::vector<TaskState> states{s};
    const auto e = fit_embedder(states, q, 1);
    CHECK(e.reconstruction_mse(states) < 1e-10);

    const auto full = fit_embedder(std::vector<TaskState>{random_state(30, 3, 4, rng)}, 12, 1);
    CHECK(full.reconstruction_mse(std::vector<TaskState>{random_state(5, 3, 4, rng)}) < 1e-10);
}

TEST_CASE("embedder residual equals the eigendecomposition oracle") {
    std::mt19937_64 rng(5);
    const std::vector<TaskState> states{random_state(100, 4, 4, rng)};
    const auto e = fit_embedder(states, 8, 1);

    Eigen::MatrixXd X(100, 16);
    for (int t = 0; t < 100; ++t) {
        for (int j = 0; j < 16; ++j) X(t, j) = states[0].frames[t][j];
    }
    const Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
    const Eigen::MatrixXd cov = C.transpose() * C / 100.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    // Eigenvalues ascend; the 8 smallest are the discarded directions.
    const double residual = es.eigenvalues().head(8).sum();
    CHECK(e.reconstruction_mse(states) == doctest::Approx(residual).epsilon(1e-9));
}

TEST_CASE("embedding examples") {
    std::mt19937_64 rng(9);
    const std::vector<TaskState> states{random_state(50, 4, 4, rng)};
    const auto e = fit_embedder(states, 6, 1);
    const auto& f = states[0].frames[3];
    CHECK(e.encode(f) == e.encode(f));
    const auto rec = e.reconstruct(f);
    const auto a = e.encode(rec), b = e.encode(f);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-10));

    // Mean frame of the training set projects onto the center of latent space.
    std::vector<double> mean(16, 0.0);
    for (const auto& fr : states[0].frames) {
        for (std::size_t j = 0; j < 16; ++j) mean[j] += fr[j] / 50.0;
    }
    for (double z : e.encode(mean)) CHECK(std::abs(z) < 1e-12);
}

TEST_CASE("degenerate embedder maps everything to the first axis") {
    TaskState s;
    s.height = 2;
    s.width = 2;
    s.frames = {{1, 2, 3, 4}, {1, 2, 3, 4}};
    const auto e = fit_embedder(std::vector<TaskState>{s}, 3, 1);
    CHECK(e.degenerate());
    CHECK(e.encode(std::vector<double>{9, 9, 9, 9}) == v({1, 0, 0}));
}

TEST_CASE("task similarity examples") {
    const auto a = series({{1, 0}, {0, 2}});
    CHECK(task_similarity(a, a) == doctest::Approx(1.0));
    CHECK(task_similarity(a, series({{0, 3}, {1, 0}})) == doctest::Approx(0.0));
    CHECK(task_similarity(series({{1, 0}, {1, 0}}), series({{1, 1}, {1, 1}})) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS((void)task_similarity(a, series({{1, 0}})), UsageError);
    CHECK_THROWS_AS((void)task_similarity(a, series({{0, 0}, {1, 0}})), DegeneracyError);
}

TEST_CASE("task similarity is symmetric and scale invariant") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::vector<double>> za(5, std::vector<double>(4)), zb = za;
        for (auto& z : za) for (auto& x : z) x = n(rng);
        for (auto& z : zb) for (auto& x : z) x = n(rng);
        const double s = task_similarity(series(za), series(zb));
        CHECK(s == task_similarity(series(zb), series(za)));
        const double k = std::exp(3.0 * n(rng));
        for (auto& z : zb) for (auto& x : z) x *= k;
        CHECK(std::abs(task_similarity(series(za), series(zb)) - s) < 1e-12);
    }
}

TEST_CASE("select_and_weight examples") {
    std::vector<std::pair<TaskId, double>> eq;
    for (int i = 0; i < 5; ++i) eq.emplace_back("s" + std::to_string(i), 0.5);
    const auto r = select_and_weight(eq, 5, 0.065);
    for (double w : r.weights) CHECK(w == doctest::Approx(0.2).epsilon(1e-12));

    const std::vector<std::pair<TaskId, double>> two{{"a", 0.7}, {"b", 0.9}};
    const auto r2 = select_and_weight(two, 2, 0.065);
    CHECK(r2.selected == std::vector<TaskId>{"b", "a"});
    const double direct = 1.0 / (1.0 + std::exp(-0.2 / 0.065));
    CHECK(r2.weights[0] == doctest::Approx(direct).epsilon(1e-12));
    CHECK(r2.weights[0] + r2.weights[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r2.max_similarity() == 0.9);

    // Ties at the cut go to the earlier entry.
    const std::vector<std::pair<TaskId, double>> tie{{"x", 0.3}, {"y", 0.5}, {"z", 0.5}};
    CHECK(select_and_weight(tie, 1, 0.065).selected == std::vector<TaskId>{"y"});
    CHECK_THROWS_AS((void)select_and_weight(tie, 0, 0.065), UsageError);
    CHECK_THROWS_AS((void)select_and_weight(tie, 2, 0.0), UsageError);
}

TEST_CASE("softmax properties") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::pair<TaskId, double>> sims;
        for (int i = 0; i < 8; ++i) sims.emplace_back("s" + std::to_string(i), u(rng));
        const auto base = select_and_weight(sims, 5, 0.065);
        double sum = 0.0;
        for (double w : base.weights) sum += w;
        CHECK(std::abs(sum - 1.0) < 1e-12);

        CHECK(select_and_weight(sims, 5, 0.03).max_weight() > base.max_weight());

        auto shifted = sims;
        for (auto& [id, s] : shifted) s += 0.25;
        const auto sh = select_and_weight(shifted, 5, 0.065);
        for (std::size_t i = 0; i < sh.weights.size(); ++i) CHECK(std::abs(sh.weights[i] - base.weights[i]) < 1e-12);
    }
}

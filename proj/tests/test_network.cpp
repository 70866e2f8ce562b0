#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <thread>

#include "deepmrc/network.hpp"
#include "deepmrc/rng.hpp"
#include "oracles.hpp"

using namespace deepmrc;

namespace {

Matrix random_matrix(Rng& rng, std::size_t n, std::size_t p, double lo = -1.0, double hi = 1.0) {
    Matrix X(n, p);
    for (auto& v : X.data()) v = rng.uniform(lo, hi);
    return X;
}

}  // namespace

TEST_CASE("init is deterministic with zero biases") {
    NetworkArchitecture arch{5, {8, 4}, 0.0};
    const auto a = init_params(arch, 42);
    const auto b = init_params(arch, 42);
    CHECK(a == b);
    CHECK(init_params(arch, 43) != a);
    for (const auto& bias : a.biases)
        for (double v : bias) CHECK(v == 0.0);
    // ReLU-scaled uniform bound per layer
    for (std::size_t l = 0; l < a.weights.size(); ++l) {
        const double bound = std::sqrt(6.0 / static_cast<double>(a.weights[l].cols()));
        for (double v : a.weights[l].data()) CHECK(std::abs(v) <= bound);
    }
}

TEST_CASE("depth-0 architecture yields a single linear layer") {
    NetworkArchitecture arch{3, {}, 0.0};
    const auto p = init_params(arch, 7);
    REQUIRE(p.weights.size() == 1);
    CHECK(p.weights[0].rows() == 1);
    CHECK(p.weights[0].cols() == 3);
    CHECK(p.biases[0].size() == 1);
}

TEST_CASE("forward computes the linear case exactly") {
    NetworkArchitecture arch{2, {}, 0.0};
    NetworkParams p = init_params(arch, 0);
    p.weights[0](0, 0) = 1.0;
    p.weights[0](0, 1) = 2.0;
    p.biases[0][0] = 0.0;
    const Vec x{3.0, 4.0};
    CHECK(forward(p, x) == 11.0);
    CHECK(forward(p, x) == forward(p, x));
}

TEST_CASE("relu clips a negative hidden unit") {
    NetworkArchitecture arch{1, {1}, 0.0};
    NetworkParams p = init_params(arch, 0);
    p.weights[0](0, 0) = 1.0;
    p.biases[0][0] = -1.0;
    p.weights[1](0, 0) = 1.0;
    p.biases[1][0] = 0.0;
    CHECK(forward(p, Vec{0.5}) == 0.0);
    CHECK(forward(p, Vec{2.0}) == 1.0);
}

TEST_CASE("forward rejects dimension mismatch") {
    NetworkArchitecture arch{3, {4}, 0.0};
    const auto p = init_params(arch, 1);
    CHECK_THROWS_AS(forward(p, Vec{1.0, 2.0}), DataError);
}

TEST_CASE("forward_batch consistency") {
    Rng rng(5);
    NetworkArchitecture arch{4, {6, 3}, 0.0};
    const auto params = init_params(arch, 9);
    const Matrix X = random_matrix(rng, 7, 4);

    const auto ev = forward_batch(params, arch, X, ForwardMode::eval());
    for (std::size_t i = 0; i < X.rows(); ++i) CHECK(ev.outputs[i] == forward(params, X.row(i)));

    // zero dropout: train mode equals eval mode
    const auto tr = forward_batch(params, arch, X, ForwardMode::training(123));
    CHECK(tr.outputs == ev.outputs);

    // single row matches forward
    Matrix one(1, 4);
    for (std::size_t j = 0; j < 4; ++j) one(0, j) = X(0, j);
    CHECK(forward_batch(params, arch, one, ForwardMode::eval()).outputs[0] == forward(params, X.row(0)));
}

TEST_CASE("dropout is seed-deterministic and inverted") {
    Rng rng(6);
    NetworkArchitecture arch{3, {16}, 0.4};
    const auto params = init_params(arch, 10);
    const Matrix X = random_matrix(rng, 5, 3);

    const auto a = forward_batch(params, arch, X, ForwardMode::training(77));
    const auto b = forward_batch(params, arch, X, ForwardMode::training(77));
    CHECK(a.outputs == b.outputs);
    const auto c = forward_batch(params, arch, X, ForwardMode::training(78));
    CHECK(a.outputs != c.outputs);

    // Mask expectation: averaging many masks reproduces the eval activation.
    const auto ev = forward_batch(params, arch, X, ForwardMode::eval());
    std::size_t ui = 0, ur = 0;
    for (std::size_t i = 0; i < ev.act[0].rows(); ++i)
        for (std::size_t r = 0; r < ev.act[0].cols(); ++r)
            if (ev.act[0](i, r) > ev.act[0](ui, ur)) {
                ui = i;
                ur = r;
            }
    const double eval_act = ev.act[0](ui, ur);
    REQUIRE(eval_act > 0.0);
    double mean = 0.0;
    const int reps = 20000;
    for (int r = 0; r < reps; ++r) {
        const auto t = forward_batch(params, arch, X, ForwardMode::training(1000 + r));
        mean += t.act[0](ui, ur);
    }
    mean /= reps;
    CHECK(std::abs(mean - eval_act) / eval_act < 0.02);
}

TEST_CASE("backward handles the trivial cases") {
    NetworkArchitecture arch{3, {5}, 0.0};
    const auto params = init_params(arch, 3);
    Rng rng(8);
    const Matrix X = random_matrix(rng, 4, 3);
    const auto trace = forward_batch(params, arch, X, ForwardMode::eval());

    const auto zero = backward(params, trace, Vec(4, 0.0));
    for (const auto& w : zero.weights)
        for (double v : w.data()) CHECK(v == 0.0);
    for (const auto& b : zero.biases)
        for (double v : b) CHECK(v == 0.0);
}

TEST_CASE("backward of a depth-0 model is the input itself") {
    NetworkArchitecture arch{3, {}, 0.0};
    const auto params = init_params(arch, 4);
    Matrix X(1, 3);
    X(0, 0) = 0.3;
    X(0, 1) = -1.2;
    X(0, 2) = 2.0;
    const auto trace = forward_batch(params, arch, X, ForwardMode::eval());
    const auto g = backward(params, trace, Vec{1.0});
    CHECK(g.weights[0](0, 0) == 0.3);
    CHECK(g.weights[0](0, 1) == -1.2);
    CHECK(g.weights[0](0, 2) == 2.0);
    CHECK(g.biases[0][0] == 1.0);
}

TEST_CASE("backward rejects a mismatched trace") {
    NetworkArchitecture small{3, {4}, 0.0};
    NetworkArchitecture big{3, {4, 2}, 0.0};
    const auto ps = init_params(small, 1);
    const auto pb = init_params(big, 1);
    Rng rng(2);
    const Matrix X = random_matrix(rng, 2, 3);
    const auto trace = forward_batch(ps, small, X, ForwardMode::eval());
    CHECK_THROWS_AS(backward(pb, trace, Vec(2, 1.0)), DataError);
    CHECK_THROWS_AS(backward(ps, trace, Vec(3, 1.0)), DataError);
}

TEST_CASE("backward matches central finite differences") {
    Rng rng(99);
    int done = 0;
    int attempt = 0;
    while (done < 20 && attempt < 200) {
        ++attempt;
        const int depth = static_cast<int>(rng.below(4));
        std::vector<int> widths;
        for (int l = 0; l < depth; ++l) widths.push_back(2 + static_cast<int>(rng.below(7)));
        NetworkArchitecture arch{2 + static_cast<int>(rng.below(4)), widths, 0.0};
        NetworkParams params = init_params(arch, 1000 + static_cast<std::uint64_t>(attempt));
        const std::size_t n = 3 + rng.below(4);
        const Matrix X = random_matrix(rng, n, static_cast<std::size_t>(arch.input_dim), -1.5, 1.5);

        // Skip draws with any pre-activation near a ReLU kink.
        const auto trace = forward_batch(params, arch, X, ForwardMode::eval());
        bool near_kink = false;
        for (const auto& z : trace.pre)
            for (double v : z.data())
                if (std::abs(v) < 1e-3) near_kink = true;
        if (near_kink) continue;

        Vec dl(n);
        for (auto& v : dl) v = rng.uniform(-1.0, 1.0);
        const auto analytic = backward(params, trace, dl);

        const auto objective = [&](const NetworkParams& p) {
            const auto t = forward_batch(p, arch, X, ForwardMode::eval());
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += dl[i] * t.outputs[i];
            return s;
        };
        double max_rel = 0.0;
        const double h = 1e-5;
        for (std::size_t l = 0; l < params.weights.size(); ++l) {
            for (std::size_t k = 0; k < params.weights[l].data().size(); ++k) {
                NetworkParams pp = params;
                pp.weights[l].data()[k] += h;
                NetworkParams pm = params;
                pm.weights[l].data()[k] -= h;
                const double fd = (objective(pp) - objective(pm)) / (2 * h);
                max_rel = std::max(max_rel, oracle::rel_err(analytic.weights[l].data()[k], fd));
            }
            for (std::size_t k = 0; k < params.biases[l].size(); ++k) {
                NetworkParams pp = params;
                pp.biases[l][k] += h;
                NetworkParams pm = params;
                pm.biases[l][k] -= h;
                const double fd = (objective(pp) - objective(pm)) / (2 * h);
                max_rel = std::max(max_rel, oracle::rel_err(analytic.biases[l][k], fd));
            }
        }
        CHECK(max_rel < 1e-4);
        ++done;
    }
    REQUIRE(done == 20);
}

TEST_CASE("first layer norms") {
    NetworkArchitecture arch{3, {2}, 0.0};
    NetworkParams p = init_params(arch, 0);
    p.weights[0](0, 0) = 3.0;
    p.weights[0](1, 0) = 4.0;
    p.weights[0](0, 1) = 0.0;
    p.weights[0](1, 1) = 0.0;
    p.weights[0](0, 2) = 1.0;
    p.weights[0](1, 2) = -1.0;
    const auto norms = first_layer_norms(p);
    CHECK(norms[0] == 5.0);
    CHECK(norms[1] == 0.0);
    CHECK_THAT(norms[2], Catch::Matchers::WithinAbs(std::sqrt(2.0), 1e-15));

    // permuting input columns permutes the norms identically
    NetworkParams q = p;
    for (std::size_t r = 0; r < 2; ++r) {
        std::swap(q.weights[0](r, 0), q.weights[0](r, 2));
    }
    const auto qn = first_layer_norms(q);
    CHECK(qn[0] == norms[2]);
    CHECK(qn[2] == norms[0]);
    CHECK(qn[1] == norms[1]);
}

TEST_CASE("eval forward is safe to share across threads") {
    NetworkArchitecture arch{6, {12, 5}, 0.0};
    const auto params = init_params(arch, 21);
    Rng rng(3);
    const Matrix X = random_matrix(rng, 64, 6);
    const auto serial = forward_batch(params, arch, X, ForwardMode::eval()).outputs;

    std::vector<Vec> results(4);
    std::vector<std::thread> threads;
    for (int t = 0; t < 4; ++t)
        threads.emplace_back([&, t]() {
            results[static_cast<std::size_t>(t)] =
                forward_batch(params, arch, X, ForwardMode::eval()).outputs;
        });
    for (auto& th : threads) th.join();
    for (const auto& r : results) CHECK(r == serial);
}

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "driftnet/network.hpp"
#include "driftnet/sde.hpp"

using namespace driftnet;
using doctest::Approx;

namespace {

NetworkParams tiny_two_unit() {
    // widths {1,2,1}: W_0 = [1; -1], v_1 = (0.2, -0.3), W_1 = [0.5, 0.25]
    Architecture arch = make_architecture(1, 1, 2);
    NetworkParams p = zero_network(arch, 6, 1.0);
    p.weights[0] = {1.0, -1.0};
    p.shifts[0] = {0.2, -0.3};
    p.weights[1] = {0.5, 0.25};
    return p;
}

NetworkParams chain_one_minus_x() {
    // widths {1,1,1,1}: relu(-x + 1) pushed through unit links == 1 - x on [0,1]
    Architecture arch = make_architecture(1, 2, 1);
    NetworkParams p = zero_network(arch, 4, 1.0);
    p.weights[0] = {-1.0};
    p.shifts[0] = {-1.0};
    p.weights[1] = {1.0};
    p.shifts[1] = {0.0};
    p.weights[2] = {1.0};
    return p;
}

RegressionSet make_set(int dim, std::vector<double> inputs, std::vector<double> targets,
                       double delta = 0.1) {
    RegressionSet d;
    d.coord = 1;
    d.dim = dim;
    d.n = static_cast<std::int64_t>(targets.size());
    d.delta = delta;
    d.inputs = std::move(inputs);
    d.targets = std::move(targets);
    return d;
}

double naive_loss(const NetworkParams& p, const RegressionSet& d, std::int64_t start,
                  std::int64_t count) {
    double acc = 0.0;
    for (std::int64_t c = 0; c < count; ++c) {
        std::int64_t k = (start + c) % d.n;
        double e = forward_unchecked(p, d.input_row(k)) - d.targets[static_cast<std::size_t>(k)];
        acc += e * e;
    }
    return acc / static_cast<double>(count);
}

}  // namespace

TEST_SUITE("network") {
    TEST_CASE("architecture validation and sizes") {
        Architecture a = make_architecture(3, 2, 5);
        CHECK(a.depth == 2);
        CHECK(a.widths == std::vector<int>{3, 5, 5, 1});
        CHECK(a.input_dim() == 3);
        CHECK(a.max_width() == 5);
        // entries: 3*5 + 5 + 5*5 + 5 + 5*1 = 55
        CHECK(a.total_entries() == 55);
        CHECK_NOTHROW(a.validate());

        Architecture bad = a;
        bad.depth = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad = a;
        bad.widths.pop_back();
        CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("depth+2"), std::invalid_argument);
        bad = a;
        bad.widths.back() = 2;
        CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("output width"),
                             std::invalid_argument);
        bad = a;
        bad.widths[1] = 0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }

    TEST_CASE("zero network evaluates to zero and is feasible") {
        Architecture arch = make_architecture(2, 3, 4);
        NetworkParams p = zero_network(arch, 2, 1.5);
        CHECK(validate_params(p).empty());
        CHECK(count_nonzero(p) == 0);
        std::vector<double> x = {0.4, 0.9};
        CHECK(forward(p, x) == 0.0);
    }

    TEST_CASE("hand-computed forward value") {
        NetworkParams p = tiny_two_unit();
        CHECK(validate_params(p).empty());
        std::vector<double> x = {0.6};
        // unit 1: relu(0.6 - 0.2) = 0.4; unit 2: relu(-0.6 + 0.3) = 0
        // output: 0.5 * 0.4 + 0.25 * 0 = 0.2
        CHECK(forward(p, x) == Approx(0.2).epsilon(1e-15));

        x[0] = 0.1;
        // unit 1: relu(-0.1) = 0; unit 2: relu(-0.1 + 0.3) = 0.2 -> 0.25 * 0.2 = 0.05
        CHECK(forward(p, x) == Approx(0.05).epsilon(1e-15));
    }

    TEST_CASE("support is the closed unit cube") {
        NetworkParams p = tiny_two_unit();
        std::vector<double> x = {1.0};
        CHECK(forward(p, x) != 0.0);  // boundary included
        x[0] = 0.0;
        CHECK(forward(p, x) == 0.075);  // 0.25 * relu(0.3)
        x[0] = -1e-12;
        CHECK(forward(p, x) == 0.0);
        x[0] = 1.0 + 1e-12;
        CHECK(forward(p, x) == 0.0);
        x[0] = 2.7;
        CHECK(forward(p, x) == 0.0);
    }

    TEST_CASE("output clamp at the sup bound") {
        // raw output x + 1 in [1, 2] on the cube; F = 1 clamps it flat
        Architecture arch = make_architecture(1, 1, 1);
        NetworkParams p = zero_network(arch, 3, 1.0);
        p.weights[0] = {1.0};
        p.shifts[0] = {-1.0};
        p.weights[1] = {1.0};
        std::vector<double> x = {0.5};
        CHECK(forward(p, x) == 1.0);
        p.weights[1][0] = -1.0;  // raw output -(x+1)
        CHECK(forward(p, x) == -1.0);
        p.sup_bound = 2.0;
        p.weights[1][0] = 1.0;
        CHECK(forward(p, x) == 1.5);  // inside the wider clamp
    }

    TEST_CASE("unit chain reproduces 1 - x exactly") {
        NetworkParams p = chain_one_minus_x();
        CHECK(validate_params(p).empty());
        CHECK(count_nonzero(p) == 4);
        for (double x : {0.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.7, 0.99, 1.0}) {
            std::vector<double> in = {x};
            CHECK(forward(p, in) == 1.0 - x);  // bit-exact
        }
    }

    TEST_CASE("dimension mismatch and validation errors") {
        NetworkParams p = tiny_two_unit();
        std::vector<double> x2 = {0.5, 0.5};
        CHECK_THROWS_WITH_AS(forward(p, x2), doctest::Contains("dimension mismatch"),
                             std::invalid_argument);

        NetworkParams big = tiny_two_unit();
        big.weights[1][0] = 1.25;
        auto msgs = validate_params(big);
        REQUIRE(msgs.size() == 1);
        CHECK(msgs[0].find("magnitude bound violated") != std::string::npos);
        CHECK_THROWS_WITH_AS(require_valid(big), doctest::Contains("magnitude bound"),
                             std::invalid_argument);

        NetworkParams tight = tiny_two_unit();
        tight.sparsity_budget = 3;  // nnz is 6
        msgs = validate_params(tight);
        REQUIRE(msgs.size() == 1);
        CHECK(msgs[0].find("sparsity budget violated (6 > 3)") != std::string::npos);

        NetworkParams nan_net = tiny_two_unit();
        nan_net.shifts[0][1] = std::nan("");
        msgs = validate_params(nan_net);
        REQUIRE(msgs.size() == 1);
        CHECK(msgs[0].find("non-finite") != std::string::npos);

        NetworkParams low_f = tiny_two_unit();
        low_f.sup_bound = 0.5;
        msgs = validate_params(low_f);
        REQUIRE(msgs.size() == 1);
        CHECK(msgs[0].find("sup bound F") != std::string::npos);

        // several problems reported together
        NetworkParams multi = tiny_two_unit();
        multi.weights[0][0] = 7.0;
        multi.sup_bound = 0.0;
        CHECK(validate_params(multi).size() == 2);

        NetworkParams misshapen = tiny_two_unit();
        misshapen.weights[0].push_back(0.0);
        msgs = validate_params(misshapen);
        REQUIRE(msgs.size() == 1);
        CHECK(msgs[0].find("weight matrix 0 has wrong shape") != std::string::npos);
    }

    TEST_CASE("count_nonzero counts every block") {
        NetworkParams p = chain_one_minus_x();
        CHECK(count_nonzero(p) == 4);
        p.shifts[1][0] = 1e-300;  // tiny but nonzero
        CHECK(count_nonzero(p) == 5);
        p.shifts[1][0] = 0.0;
        p.weights[0][0] = 0.0;
        CHECK(count_nonzero(p) == 3);
    }

    TEST_CASE("projection clips then keeps the s largest magnitudes") {
        // entries (2, 0.5, -3): after clipping (1, 0.5, -1); keep 2 -> (1, 0, -1)
        Architecture arch = make_architecture(1, 1, 2);
        NetworkParams p = zero_network(arch, 6, 1.0);
        p.weights[0] = {2.0, 0.5};
        p.weights[1] = {-3.0, 0.0};
        NetworkParams q = project_params(p, 2);
        CHECK(q.weights[0][0] == 1.0);
        CHECK(q.weights[0][1] == 0.0);
        CHECK(q.weights[1][0] == -1.0);
        CHECK(q.weights[1][1] == 0.0);
        CHECK(q.sparsity_budget == 2);
        CHECK(count_nonzero(q) == 2);
        CHECK(validate_params(q).empty());
    }

    TEST_CASE("projection ties resolve by canonical parameter order") {
        // W_0, v_1, W_1 all magnitude 1; earlier block wins
        Architecture arch = make_architecture(1, 1, 1);
        NetworkParams p = zero_network(arch, 3, 1.0);
        p.weights[0] = {1.0};
        p.shifts[0] = {1.0};
        p.weights[1] = {-1.0};
        NetworkParams q = project_params(p, 2);
        CHECK(q.weights[0][0] == 1.0);
        CHECK(q.shifts[0][0] == 1.0);
        CHECK(q.weights[1][0] == 0.0);

        // within one block, row-major order wins ties
        Architecture arch2 = make_architecture(2, 1, 2);
        NetworkParams r = zero_network(arch2, 10, 1.0);
        r.weights[0] = {0.5, 0.5, 0.5, 0.5};
        NetworkParams rp = project_params(r, 2);
        CHECK(rp.weights[0] == std::vector<double>{0.5, 0.5, 0.0, 0.0});
    }

    TEST_CASE("projection returns feasible input unchanged") {
        NetworkParams p = chain_one_minus_x();  // nnz 4, all magnitudes <= 1
        NetworkParams q = project_params(p, 4);
        CHECK(q.weights == p.weights);
        CHECK(q.shifts == p.shifts);
        CHECK(q.sparsity_budget == 4);
        NetworkParams loose = project_params(p, 100);
        CHECK(loose.weights == p.weights);
        CHECK(loose.sparsity_budget == 100);
        CHECK_THROWS_WITH_AS(project_params(p, 1), doctest::Contains("s must be >= 2"),
                             std::invalid_argument);
    }

    TEST_CASE("init schemes are feasible and deterministic") {
        Architecture arch = make_architecture(2, 4, 6);
        for (InitScheme scheme : {InitScheme::uniform_pm1_scaled, InitScheme::zeros_plus_sparse}) {
            NetworkParams a = init_params(arch, 20, 1.0, scheme, 77);
            NetworkParams b = init_params(arch, 20, 1.0, scheme, 77);
            NetworkParams c = init_params(arch, 20, 1.0, scheme, 78);
            CHECK(validate_params(a).empty());
            CHECK(count_nonzero(a) <= 20);
            CHECK(count_nonzero(a) > 0);
            CHECK(a.weights == b.weights);
            CHECK(a.shifts == b.shifts);
            CHECK(a.weights != c.weights);
        }
        // the ridge scheme must produce a network that is not identically zero
        NetworkParams ridge = init_params(arch, 20, 1.0, InitScheme::zeros_plus_sparse, 5);
        bool nonzero_somewhere = false;
        for (int i = 0; i < 64 && !nonzero_somewhere; ++i) {
            double t = (i + 0.5) / 64.0;
            std::vector<double> x = {t, 1.0 - t};
            if (forward_unchecked(ridge, x) != 0.0) nonzero_somewhere = true;
        }
        CHECK(nonzero_somewhere);
    }

    TEST_CASE("param buffers and masks") {
        Architecture arch = make_architecture(2, 2, 3);
        ParamBuffers buf = ParamBuffers::zeros_like(arch);
        REQUIRE(buf.weights.size() == 3);
        REQUIRE(buf.shifts.size() == 2);
        CHECK(buf.weights[0].size() == 6);
        CHECK(buf.weights[1].size() == 9);
        CHECK(buf.weights[2].size() == 3);
        CHECK(buf.shifts[0].size() == 3);
        buf.fill(2.5);
        CHECK(buf.weights[1][4] == 2.5);
        CHECK(buf.shifts[1][0] == 2.5);

        ParamMask all = ParamMask::all(arch);
        ParamMask none = ParamMask::none(arch);
        CHECK(all.count() == arch.total_entries());
        CHECK(none.count() == 0);

        NetworkParams p = zero_network(arch, 5, 1.0);
        p.weights[0][1] = 0.3;
        p.shifts[1][2] = -0.4;
        ParamMask sup = ParamMask::support(p);
        CHECK(sup.count() == 2);
        CHECK(sup.weights[0][1] == 1);
        CHECK(sup.shifts[1][2] == 1);
        CHECK(sup.weights[0][0] == 0);
    }

    TEST_CASE("batched loss matches the naive mean and wraps around") {
        NetworkParams p = tiny_two_unit();
        std::vector<double> xs, ys;
        const std::int64_t n = 10;
        for (std::int64_t k = 0; k < n; ++k) {
            xs.push_back((static_cast<double>(k) + 0.5) / static_cast<double>(n));
            ys.push_back(0.31 * static_cast<double>(k % 4) - 0.2);
        }
        xs[3] = 1.7;  // one off-cube row
        RegressionSet d = make_set(1, xs, ys);

        BatchEngine small(p.arch, 3);
        BatchEngine big(p.arch, 64);
        double full_naive = naive_loss(p, d, 0, n);
        CHECK(small.loss(p, d, 0, n) == Approx(full_naive).epsilon(1e-12));
        CHECK(big.loss(p, d, 0, n) == Approx(full_naive).epsilon(1e-12));
        CHECK(small.loss(p, d, 0, n) == Approx(big.loss(p, d, 0, n)).epsilon(1e-12));

        // rows {8, 9, 0, 1, 2}
        double wrap_naive = naive_loss(p, d, 8, 5);
        CHECK(small.loss(p, d, 8, 5) == Approx(wrap_naive).epsilon(1e-12));
        CHECK(big.loss(p, d, 8, 5) == Approx(wrap_naive).epsilon(1e-12));
    }

    TEST_CASE("gradient matches central finite differences") {
        Architecture arch = make_architecture(2, 1, 2);
        NetworkParams p = zero_network(arch, 8, 2.0);
        p.weights[0] = {0.8, -0.3, 0.5, 0.6};
        p.shifts[0] = {0.1, -0.2};
        p.weights[1] = {0.7, -0.4};

        // preactivations stay well away from the kinks at these samples
        std::vector<double> xs = {0.3, 0.4, 0.7, 0.2, 0.9, 0.9, 0.05, 0.6, 1.2, 0.5, 0.5, 0.5};
        std::vector<double> ys = {0.3, -0.1, 0.25, 0.0, 0.4, -0.3};
        RegressionSet d = make_set(2, xs, ys);

        LsqGradient g = grad_lsq(p, d, 0, d.n);
        CHECK(g.loss == Approx(naive_loss(p, d, 0, d.n)).epsilon(1e-12));

        const double eps = 1e-6;
        auto loss_at = [&](const NetworkParams& q) { return grad_lsq(q, d, 0, d.n).loss; };
        for (std::size_t j = 0; j < p.weights.size(); ++j) {
            for (std::size_t i = 0; i < p.weights[j].size(); ++i) {
                NetworkParams up = p, dn = p;
                up.weights[j][i] += eps;
                dn.weights[j][i] -= eps;
                double fd = (loss_at(up) - loss_at(dn)) / (2 * eps);
                CHECK(g.grads.weights[j][i] ==
                      Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
            }
        }
        for (std::size_t j = 0; j < p.shifts.size(); ++j) {
            for (std::size_t i = 0; i < p.shifts[j].size(); ++i) {
                NetworkParams up = p, dn = p;
                up.shifts[j][i] += eps;
                dn.shifts[j][i] -= eps;
                double fd = (loss_at(up) - loss_at(dn)) / (2 * eps);
                CHECK(g.grads.shifts[j][i] ==
                      Approx(fd).epsilon(1e-5).scale(std::max(1.0, std::abs(fd))));
            }
        }
    }

    TEST_CASE("clamped samples contribute loss but zero gradient") {
        // raw output x + 1 >= 1 on the cube, F = 1: always clamped
        Architecture arch = make_architecture(1, 1, 1);
        NetworkParams p = zero_network(arch, 3, 1.0);
        p.weights[0] = {1.0};
        p.shifts[0] = {-1.0};
        p.weights[1] = {1.0};
        RegressionSet d = make_set(1, {0.2, 0.5, 0.8}, {0.0, 0.5, 2.0});
        LsqGradient g = grad_lsq(p, d, 0, 3);
        // losses: (1-0)^2, (1-0.5)^2, (1-2)^2 -> mean = (1 + 0.25 + 1)/3
        CHECK(g.loss == Approx(2.25 / 3.0).epsilon(1e-15));
        for (const auto& w : g.grads.weights)
            for (double v : w) CHECK(v == 0.0);
        for (const auto& s : g.grads.shifts)
            for (double v : s) CHECK(v == 0.0);
    }

    TEST_CASE("masked-out entries receive exact zeros") {
        Architecture arch = make_architecture(2, 1, 2);
        NetworkParams p = zero_network(arch, 8, 2.0);
        p.weights[0] = {0.8, -0.3, 0.5, 0.6};
        p.shifts[0] = {0.1, -0.2};
        p.weights[1] = {0.7, -0.4};
        RegressionSet d = make_set(2, {0.3, 0.4, 0.7, 0.2}, {0.1, -0.2});

        ParamMask mask = ParamMask::none(arch);
        mask.weights[0][1] = 1;
        mask.shifts[0][0] = 1;
        LsqGradient g = grad_lsq(p, d, 0, d.n, &mask);
        LsqGradient full = grad_lsq(p, d, 0, d.n);
        CHECK(g.grads.weights[0][1] == full.grads.weights[0][1]);
        CHECK(g.grads.shifts[0][0] == full.grads.shifts[0][0]);
        CHECK(g.grads.weights[0][0] == 0.0);
        CHECK(g.grads.weights[0][2] == 0.0);
        CHECK(g.grads.weights[0][3] == 0.0);
        CHECK(g.grads.shifts[0][1] == 0.0);
        CHECK(g.grads.weights[1][0] == 0.0);
        CHECK(g.grads.weights[1][1] == 0.0);
        CHECK(g.grads.weights[0][1] != 0.0);  // the kept entry is genuinely live
    }

    TEST_CASE("grad_lsq input validation") {
        NetworkParams p = tiny_two_unit();
        RegressionSet d = make_set(1, {0.5}, {0.1});
        CHECK_THROWS_WITH_AS(grad_lsq(p, d, 0, 0), doctest::Contains("empty batch"),
                             std::invalid_argument);
        RegressionSet d2 = make_set(2, {0.5, 0.5}, {0.1});
        CHECK_THROWS_WITH_AS(grad_lsq(p, d2, 0, 1), doctest::Contains("dimension mismatch"),
                             std::invalid_argument);
    }

    TEST_CASE("network file round trip is bit-exact") {
        namespace fs = std::filesystem;
        fs::path dir = fs::temp_directory_path() / "driftnet_net_io_test";
        fs::create_directories(dir);
        std::string file = (dir / "net.bin").string();

        Architecture arch = make_architecture(3, 2, 4);
        NetworkParams p = init_params(arch, 15, 2.5, InitScheme::zeros_plus_sparse, 99);
        p.weights[1][2] = 0x1.fffffffffffffp-3;  // awkward mantissa survives
        write_network(p, file);
        NetworkParams q = read_network(file);
        CHECK(q.arch == p.arch);
        CHECK(q.weights == p.weights);
        CHECK(q.shifts == p.shifts);
        CHECK(q.sparsity_budget == p.sparsity_budget);
        CHECK(q.sup_bound == p.sup_bound);

        std::string bad = (dir / "bad.bin").string();
        {
            std::ofstream out(bad, std::ios::binary);
            out << "NOTDRIFT garbage";
        }
        CHECK_THROWS_WITH_AS(read_network(bad), doctest::Contains("bad magic"),
                             std::runtime_error);

        std::string trunc = (dir / "trunc.bin").string();
        {
            std::ifstream in(file, std::ios::binary);
            std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
            std::ofstream out(trunc, std::ios::binary);
            out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
        }
        CHECK_THROWS_AS(read_network(trunc), std::runtime_error);
        CHECK_THROWS_WITH_AS(read_network((dir / "missing.bin").string()),
                             doctest::Contains("cannot open"), std::runtime_error);
        fs::remove_all(dir);
    }
}

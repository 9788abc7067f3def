#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "aeq/errors.hpp"
#include "aeq/tied_mlp.hpp"
#include "helpers.hpp"

using namespace aeq;

namespace {

GroupPtr shared_group(PermGroup g) { return std::make_shared<const PermGroup>(std::move(g)); }

NodeActionPlan diagonal_plan(GroupPtr g, std::size_t boundaries) {
    NodeActionPlan plan;
    for (std::size_t b = 0; b < boundaries; ++b) plan.boundaries.push_back(GroupAction::natural(g));
    return plan;
}

/// Single 3x3 layer tied under the order-6 closure of shift and reversal:
/// two weight orbits (diagonal, off-diagonal), one bias orbit.
TiedMlp fig_layer(Activation act = Activation::Identity) {
    auto z3 = shared_group(close_generators({shift_perm(3, 1)}));
    auto z2 = shared_group(close_generators({reversal_perm(3)}));
    std::vector<NodeActionPlan> plans{diagonal_plan(z3, 2), diagonal_plan(z2, 2)};
    return build_tied_mlp({3, 3}, plans, {act});
}

void fill_dyadic(TiedMlp& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> num(-16, 16);
    for (TiedLayer& l : net.layers) {
        for (double& w : l.free_weights) w = static_cast<double>(num(rng)) / 8.0;
        for (double& b : l.free_biases) b = static_cast<double>(num(rng)) / 8.0;
        l.refresh_expansion();
    }
}

LabeledDataset random_batch_dataset(std::size_t n, std::size_t dim, std::size_t classes,
                                    std::uint64_t seed) {
    LabeledDataset d;
    d.side = 0;  // not grid data; only used through train/eval
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    std::uniform_int_distribution<int> cls(0, static_cast<int>(classes) - 1);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(dim);
        for (double& v : x) v = val(rng);
        d.images.push_back(std::move(x));
        d.labels.push_back(static_cast<std::uint8_t>(cls(rng)));
    }
    return d;
}

}  // namespace

TEST_CASE("forward basics") {
    SUBCASE("zero parameters give zero output") {
        TiedMlp net = build_tied_mlp({3, 3}, {}, {Activation::Identity});
        const std::vector<double> y = net.forward(std::vector<double>{1.0, -2.0, 3.0});
        for (double v : y) CHECK(v == 0.0);
    }

    SUBCASE("the two-orbit layer computes a*x_m + b*sum of the others") {
        TiedMlp net = fig_layer();
        REQUIRE(net.layers[0].weight_partition.orbit_count == 2);
        REQUIRE(net.layers[0].bias_partition.orbit_count == 1);
        net.layers[0].free_weights = {2.0, 0.5};  // orbit 0 holds edge (0,0): the diagonal
        net.layers[0].free_biases = {0.25};
        net.layers[0].refresh_expansion();

        const std::vector<double> y = net.forward(std::vector<double>{1.0, 2.0, 3.0});
        CHECK(y[0] == doctest::Approx(2.0 * 1.0 + 0.5 * 5.0 + 0.25));
        CHECK(y[1] == doctest::Approx(2.0 * 2.0 + 0.5 * 4.0 + 0.25));
        CHECK(y[2] == doctest::Approx(2.0 * 3.0 + 0.5 * 3.0 + 0.25));
    }

    SUBCASE("a one-hot input reads off a weight column") {
        TiedMlp net = build_tied_mlp({4, 3}, {}, {Activation::Identity});
        init_params(net, 9);
        std::vector<double> x(4, 0.0);
        x[2] = 1.0;
        const std::vector<double> y = net.forward(x);
        for (std::size_t m = 0; m < 3; ++m) {
            CHECK(y[m] == doctest::Approx(net.layers[0].weight(2, m)));
        }
    }

    SUBCASE("dimension mismatch is rejected") {
        TiedMlp net = build_tied_mlp({4, 3}, {}, {Activation::Identity});
        CHECK_THROWS_AS(net.forward(std::vector<double>{1.0, 2.0}), ValidationError);
    }
}

TEST_CASE("plan construction and closure") {
    auto z3 = shared_group(close_generators({shift_perm(3, 1)}));
    auto z2 = shared_group(close_generators({reversal_perm(3)}));
    std::vector<NodeActionPlan> plans{diagonal_plan(z3, 2), diagonal_plan(z2, 2)};
    const NodeActionPlan closure = close_plans(plans);
    CHECK(closure.boundaries[0].group().order() == 6);
    CHECK(closure.boundaries[0].domain_size() == 3);
    CHECK(closure.boundaries[1].domain_size() == 3);

    // Hidden widths must be divisible by the group order.
    auto z4 =
        shared_group(close_generators({rot90_perm(ImageGrid::of(2))}));
    CHECK_THROWS_AS(classifier_plan(z4, {4, 6, 2}), ConfigError);
    CHECK_NOTHROW(classifier_plan(z4, {4, 8, 2}));
    CHECK_THROWS_AS(classifier_plan(z4, {5, 8, 2}), ConfigError);
}

TEST_CASE("equivariance of tied layers against the full closure group") {
    TiedMlp net = fig_layer(Activation::Relu);
    fill_dyadic(net, 31);

    auto z3 = shared_group(close_generators({shift_perm(3, 1)}));
    auto z2 = shared_group(close_generators({reversal_perm(3)}));
    std::vector<NodeActionPlan> plans{diagonal_plan(z3, 2), diagonal_plan(z2, 2)};
    const NodeActionPlan closure = close_plans(plans);

    SUBCASE("exact mode sees zero deviation through relu") {
        const EquivarianceReport r =
            check_equivariance_exact(net, closure.boundaries[0], closure.boundaries[1]);
        CHECK(r.passed);
        CHECK(r.exhaustive);
        CHECK(r.elements_checked == 6);
        CHECK(r.max_deviation == 0.0);
    }

    SUBCASE("double mode stays within 1e-6 relative") {
        init_params(net, 5);
        const EquivarianceReport r =
            check_equivariance(net, closure.boundaries[0], closure.boundaries[1]);
        CHECK(r.passed);
        CHECK(r.max_deviation <= 1e-6);
    }

    SUBCASE("an untied random layer fails against the cyclic group") {
        TiedMlp untied = build_tied_mlp({3, 3}, {}, {Activation::Identity});
        init_params(untied, 17);
        const NodeActionPlan z3_only = close_plans(std::vector<NodeActionPlan>{diagonal_plan(z3, 2)});
        const EquivarianceReport r =
            check_equivariance(untied, z3_only.boundaries[0], z3_only.boundaries[1]);
        CHECK_FALSE(r.passed);
        CHECK_FALSE(r.failing_elements.empty());
    }

    SUBCASE("any layer passes against the trivial group") {
        TiedMlp untied = build_tied_mlp({3, 3}, {}, {Activation::Identity});
        init_params(untied, 23);
        auto triv = shared_group(PermGroup::trivial(3));
        const EquivarianceReport r = check_equivariance(untied, GroupAction::natural(triv),
                                                        GroupAction::natural(triv));
        CHECK(r.passed);
    }
}

TEST_CASE("a layer passing the closure check is constant on closure orbits") {
    TiedMlp net = fig_layer();
    fill_dyadic(net, 77);

    auto z3 = shared_group(close_generators({shift_perm(3, 1)}));
    auto z2 = shared_group(close_generators({reversal_perm(3)}));
    const NodeActionPlan closure =
        close_plans(std::vector<NodeActionPlan>{diagonal_plan(z3, 2), diagonal_plan(z2, 2)});
    REQUIRE(check_equivariance_exact(net, closure.boundaries[0], closure.boundaries[1]).passed);

    // Inspect the expanded weights directly on the closure-group orbits.
    const EdgeAction closure_edges =
        build_edge_action(net.layers[0].shape, closure.boundaries[0], closure.boundaries[1]);
    const OrbitPartition closure_orbits = orbits_basic(net.layers[0].shape, closure_edges).partition;
    for (std::size_t n = 0; n < 3; ++n) {
        for (std::size_t m = 0; m < 3; ++m) {
            for (std::size_t n2 = 0; n2 < 3; ++n2) {
                for (std::size_t m2 = 0; m2 < 3; ++m2) {
                    const auto a = edge_index(net.layers[0].shape, n, m);
                    const auto b = edge_index(net.layers[0].shape, n2, m2);
                    if (closure_orbits.assignment[a] == closure_orbits.assignment[b]) {
                        CHECK(net.layers[0].weight(n, m) == net.layers[0].weight(n2, m2));
                    }
                }
            }
        }
    }
}

TEST_CASE("tied gradients match central finite differences on a 6x4x3 net") {
    auto z2 = shared_group(close_generators({reversal_perm(6)}));
    NodeActionPlan plan;
    plan.boundaries.push_back(GroupAction::natural(z2));
    plan.boundaries.push_back(GroupAction::regular_blocks(z2, 4));
    plan.boundaries.push_back(GroupAction::trivial(z2, 3));
    std::vector<NodeActionPlan> plans{plan};
    TiedMlp net = build_tied_mlp({6, 4, 3}, plans);
    init_params(net, 2024);

    const LabeledDataset batch = random_batch_dataset(8, 6, 3, 55);
    Eigen::MatrixXd x(8, 6);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 6; ++j) x(i, j) = batch.images[i][j];
    }

    Gradients grads;
    loss_and_gradients(net, x, batch.labels, grads);

    const double h = 1e-5;
    auto loss_at = [&]() {
        Gradients tmp;
        return loss_and_gradients(net, x, batch.labels, tmp);
    };
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        TiedLayer& layer = net.layers[k];
        for (std::size_t c = 0; c < layer.free_weights.size(); ++c) {
            const double keep = layer.free_weights[c];
            layer.free_weights[c] = keep + h;
            layer.refresh_expansion();
            const double up = loss_at();
            layer.free_weights[c] = keep - h;
            layer.refresh_expansion();
            const double down = loss_at();
            layer.free_weights[c] = keep;
            layer.refresh_expansion();
            const double fd = (up - down) / (2 * h);
            const double rel = std::abs(fd - grads.weights[k][c]) /
                               std::max(1e-8, std::abs(fd) + std::abs(grads.weights[k][c]));
            CHECK(rel < 1e-4);
        }
        for (std::size_t c = 0; c < layer.free_biases.size(); ++c) {
            const double keep = layer.free_biases[c];
            layer.free_biases[c] = keep + h;
            layer.refresh_expansion();
            const double up = loss_at();
            layer.free_biases[c] = keep - h;
            layer.refresh_expansion();
            const double down = loss_at();
            layer.free_biases[c] = keep;
            layer.refresh_expansion();
            const double fd = (up - down) / (2 * h);
            const double rel = std::abs(fd - grads.biases[k][c]) /
                               std::max(1e-8, std::abs(fd) + std::abs(grads.biases[k][c]));
            CHECK(rel < 1e-4);
        }
    }
}

TEST_CASE("training behavior") {
    SUBCASE("zero learning rate leaves parameters unchanged") {
        TiedMlp net = build_tied_mlp({6, 4, 3}, {});
        init_params(net, 8);
        const auto before_w = net.layers[0].free_weights;
        const LabeledDataset data = random_batch_dataset(32, 6, 3, 4);
        TrainConfig cfg;
        cfg.learning_rate = 0.0;
        cfg.epochs = 3;
        train(net, data, data, cfg);
        CHECK(net.layers[0].free_weights == before_w);
    }

    SUBCASE("a linearly separable toy set trains to at least 95 percent") {
        // Two classes separated along a random direction in 64 dims.
        std::mt19937_64 rng(99);
        std::uniform_real_distribution<double> val(-1.0, 1.0);
        std::vector<double> w(64);
        for (double& v : w) v = val(rng);
        LabeledDataset data;
        data.side = 8;
        for (int i = 0; i < 200; ++i) {
            std::vector<double> x(64);
            double dot = 0.0;
            for (std::size_t j = 0; j < 64; ++j) {
                x[j] = val(rng);
                dot += w[j] * x[j];
            }
            data.images.push_back(std::move(x));
            data.labels.push_back(dot > 0 ? 1 : 0);
        }

        TiedMlp net = build_tied_mlp({64, 16, 2}, {});
        init_params(net, 1);
        TrainConfig cfg;
        cfg.epochs = 10;
        cfg.learning_rate = 0.05;
        cfg.seed = 3;
        train(net, data, data, cfg);
        CHECK(evaluate_accuracy(net, data) >= 0.95);
    }

    SUBCASE("training preserves the tying structure") {
        TiedMlp net = fig_layer(Activation::Softmax);
        init_params(net, 12);
        const LabeledDataset data = random_batch_dataset(64, 3, 3, 6);
        TrainConfig cfg;
        cfg.epochs = 2;
        train(net, data, data, cfg);
        const TiedLayer& l = net.layers[0];
        for (std::size_t n = 0; n < 3; ++n) {
            for (std::size_t m = 0; m < 3; ++m) {
                const auto e = edge_index(l.shape, n, m);
                CHECK(l.weight_matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) ==
                      l.free_weights[l.weight_partition.assignment[e]]);
            }
        }
    }

    SUBCASE("non-finite loss aborts with a diagnostic") {
        TiedMlp net = build_tied_mlp({4, 2}, {});
        init_params(net, 3);
        net.layers[0].free_weights[0] = std::numeric_limits<double>::infinity();
        net.layers[0].refresh_expansion();
        const LabeledDataset data = random_batch_dataset(16, 4, 2, 10);
        TrainConfig cfg;
        cfg.epochs = 1;
        CHECK_THROWS_AS(train(net, data, data, cfg), Error);
    }
}

TEST_CASE("free parameter counts") {
    SUBCASE("untied counts are the full edge counts") {
        TiedMlp net = build_tied_mlp({6, 4, 3}, {});
        CHECK(count_free_parameters(net, true) == 6 * 4 + 4 * 3);
        CHECK(count_free_parameters(net, false) == 6 * 4 + 4 * 3 + 4 + 3);
    }

    SUBCASE("a free action divides the weight count by the group order") {
        auto z4 = shared_group(close_generators({rot90_perm(ImageGrid::of(4))}));
        std::vector<NodeActionPlan> plans{classifier_plan(z4, {16, 8, 4})};
        TiedMlp net = build_tied_mlp({16, 8, 4}, plans);
        CHECK(count_free_parameters(net, true) == (16 * 8) / 4 + (8 * 4) / 4);
    }
}

TEST_CASE("checkpoints round-trip exactly") {
    const auto dir = std::filesystem::temp_directory_path() / "aeq_ckpt_test";
    std::filesystem::create_directories(dir);
    const auto prefix = dir / "net";

    auto z2 = shared_group(close_generators({reversal_perm(6)}));
    NodeActionPlan plan;
    plan.boundaries.push_back(GroupAction::natural(z2));
    plan.boundaries.push_back(GroupAction::regular_blocks(z2, 4));
    plan.boundaries.push_back(GroupAction::trivial(z2, 3));
    std::vector<NodeActionPlan> plans{plan};
    TiedMlp net = build_tied_mlp({6, 4, 3}, plans);
    init_params(net, 404);

    save_checkpoint(net, prefix, nlohmann::json{{"seed", 404}});
    const TiedMlp back = load_checkpoint(prefix);
    REQUIRE(back.layers.size() == net.layers.size());
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        CHECK(back.layers[k].free_weights == net.layers[k].free_weights);
        CHECK(back.layers[k].free_biases == net.layers[k].free_biases);
        CHECK(back.layers[k].weight_partition == net.layers[k].weight_partition);
        CHECK(back.layers[k].bias_partition == net.layers[k].bias_partition);
        CHECK(back.layers[k].activation == net.layers[k].activation);
    }
    const std::vector<double> x{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
    CHECK(net.forward(x) == back.forward(x));
}

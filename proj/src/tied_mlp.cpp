#include "aeq/tied_mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "aeq/errors.hpp"
#include "aeq/rational.hpp"

namespace aeq {

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Softmax: return "softmax";
    }
    return "identity";
}

Activation activation_from_string(const std::string& s) {
    if (s == "identity") return Activation::Identity;
    if (s == "relu") return Activation::Relu;
    if (s == "softmax") return Activation::Softmax;
    throw ConfigError("unknown activation: " + s);
}

void TiedLayer::refresh_expansion() {
    weight_matrix.resize(static_cast<Eigen::Index>(shape.n_out),
                         static_cast<Eigen::Index>(shape.n_in));
    for (std::size_t n = 0; n < shape.n_in; ++n) {
        const std::uint32_t* ids = weight_partition.assignment.data() + n * shape.n_out;
        for (std::size_t m = 0; m < shape.n_out; ++m) {
            weight_matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
                free_weights[ids[m]];
        }
    }
    bias_vector.resize(static_cast<Eigen::Index>(shape.n_out));
    for (std::size_t m = 0; m < shape.n_out; ++m) {
        bias_vector(static_cast<Eigen::Index>(m)) = free_biases[bias_partition.assignment[m]];
    }
}

std::vector<std::size_t> TiedMlp::widths() const {
    std::vector<std::size_t> w;
    if (layers.empty()) return w;
    w.push_back(layers[0].shape.n_in);
    for (const TiedLayer& l : layers) w.push_back(l.shape.n_out);
    return w;
}

namespace {

void apply_activation_rows(Eigen::MatrixXd& z, Activation a) {
    switch (a) {
        case Activation::Identity:
            break;
        case Activation::Relu:
            z = z.cwiseMax(0.0);
            break;
        case Activation::Softmax:
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                const double mx = z.row(r).maxCoeff();
                Eigen::ArrayXd e = (z.row(r).array() - mx).exp();
                z.row(r) = (e / e.sum()).matrix();
            }
            break;
    }
}

Eigen::MatrixXd forward_batch(const TiedMlp& net, const Eigen::MatrixXd& x,
                              std::vector<Eigen::MatrixXd>* pre = nullptr,
                              std::vector<Eigen::MatrixXd>* post = nullptr) {
    Eigen::MatrixXd a = x;
    if (post) post->push_back(a);
    for (const TiedLayer& l : net.layers) {
        Eigen::MatrixXd z = a * l.weight_matrix.transpose();
        z.rowwise() += l.bias_vector.transpose();
        if (pre) pre->push_back(z);
        apply_activation_rows(z, l.activation);
        a = std::move(z);
        if (post) post->push_back(a);
    }
    return a;
}

}  // namespace

Eigen::VectorXd TiedMlp::forward(const Eigen::VectorXd& x) const {
    if (layers.empty()) throw ValidationError("network has no layers");
    if (x.size() != static_cast<Eigen::Index>(layers[0].shape.n_in)) {
        throw ValidationError("input length does not match the first layer");
    }
    Eigen::MatrixXd row = x.transpose();
    return forward_batch(*this, row).row(0).transpose();
}

std::vector<double> TiedMlp::forward(const std::vector<double>& x) const {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd y = forward(v);
    return std::vector<double>(y.data(), y.data() + y.size());
}

NodeActionPlan classifier_plan(GroupPtr group, const std::vector<std::size_t>& widths) {
    if (widths.size() < 2) throw ConfigError("network needs at least two widths");
    if (group->degree() != widths.front()) {
        throw ConfigError("group degree " + std::to_string(group->degree()) +
                          " does not match the input width " + std::to_string(widths.front()));
    }
    NodeActionPlan plan;
    plan.boundaries.push_back(GroupAction::natural(group));
    for (std::size_t b = 1; b + 1 < widths.size(); ++b) {
        plan.boundaries.push_back(GroupAction::regular_blocks(group, widths[b]));
    }
    plan.boundaries.push_back(GroupAction::trivial(group, widths.back()));
    return plan;
}

NodeActionPlan close_plans(std::span<const NodeActionPlan> plans, const GroupLimits& limits) {
    if (plans.empty()) throw ValidationError("close_plans needs at least one plan");
    const std::size_t n_boundaries = plans[0].boundaries.size();
    std::vector<std::size_t> sizes(n_boundaries);
    std::vector<std::size_t> offsets(n_boundaries, 0);
    std::size_t total = 0;
    for (std::size_t b = 0; b < n_boundaries; ++b) {
        sizes[b] = plans[0].boundaries[b].domain_size();
        offsets[b] = total;
        total += sizes[b];
    }
    for (const NodeActionPlan& p : plans) {
        if (p.boundaries.size() != n_boundaries) {
            throw ValidationError("plans disagree on the number of boundaries");
        }
        for (std::size_t b = 0; b < n_boundaries; ++b) {
            if (p.boundaries[b].domain_size() != sizes[b]) {
                throw ValidationError("plans disagree on boundary sizes");
            }
        }
    }

    std::vector<Perm> generators;
    for (const NodeActionPlan& p : plans) {
        const std::size_t order = p.boundaries[0].group().order();
        for (std::size_t g = 0; g < order; ++g) {
            Perm block;
            block.map.resize(total);
            for (std::size_t b = 0; b < n_boundaries; ++b) {
                const Perm& part = p.boundaries[b].perm(g);
                for (std::size_t i = 0; i < sizes[b]; ++i) {
                    block.map[offsets[b] + i] =
                        static_cast<std::uint32_t>(offsets[b]) + part.map[i];
                }
            }
            generators.push_back(std::move(block));
        }
    }

    auto closure = std::make_shared<const PermGroup>(close_generators(generators, limits));
    NodeActionPlan out;
    for (std::size_t b = 0; b < n_boundaries; ++b) {
        std::vector<Perm> perms;
        perms.reserve(closure->order());
        for (const Perm& e : closure->elements()) {
            Perm part;
            part.map.resize(sizes[b]);
            for (std::size_t i = 0; i < sizes[b]; ++i) {
                part.map[i] = e.map[offsets[b] + i] - static_cast<std::uint32_t>(offsets[b]);
            }
            perms.push_back(std::move(part));
        }
        out.boundaries.push_back(
            GroupAction::create(closure, std::move(perms), limits, ActionCheck::Spot));
    }
    return out;
}

TiedMlp build_tied_mlp(const std::vector<std::size_t>& widths,
                       std::span<const NodeActionPlan> plans,
                       std::vector<Activation> activations) {
    if (widths.size() < 2) throw ConfigError("network needs at least two widths");
    const std::size_t n_layers = widths.size() - 1;
    if (activations.empty()) {
        activations.assign(n_layers, Activation::Relu);
        activations.back() = Activation::Softmax;
    }
    if (activations.size() != n_layers) {
        throw ConfigError("need one activation per layer");
    }
    for (const NodeActionPlan& p : plans) {
        if (p.boundaries.size() != widths.size()) {
            throw ConfigError("plan boundary count does not match the architecture");
        }
        for (std::size_t b = 0; b < widths.size(); ++b) {
            if (p.boundaries[b].domain_size() != widths[b]) {
                throw ConfigError("plan boundary " + std::to_string(b) +
                                  " acts on " + std::to_string(p.boundaries[b].domain_size()) +
                                  " nodes, expected " + std::to_string(widths[b]));
            }
        }
    }

    TiedMlp net;
    for (std::size_t k = 0; k < n_layers; ++k) {
        TiedLayer layer;
        layer.shape = LayerShape::of(widths[k], widths[k + 1]);
        layer.activation = activations[k];
        if (plans.empty()) {
            layer.weight_partition = OrbitPartition::singletons(layer.shape.edge_count());
            layer.bias_partition = OrbitPartition::singletons(layer.shape.n_out);
        } else {
            std::vector<EdgeAction> edge_actions;
            edge_actions.reserve(plans.size());
            std::vector<const std::vector<Perm>*> out_node_actions;
            for (const NodeActionPlan& p : plans) {
                edge_actions.push_back(
                    build_edge_action(layer.shape, p.boundaries[k], p.boundaries[k + 1]));
                out_node_actions.push_back(&p.boundaries[k + 1].perms());
            }
            layer.weight_partition = orbits_fast(layer.shape, edge_actions).partition;
            layer.bias_partition =
                orbits_by_frontier(layer.shape.n_out, out_node_actions).partition;
        }
        layer.free_weights.assign(layer.weight_partition.orbit_count, 0.0);
        layer.free_biases.assign(layer.bias_partition.orbit_count, 0.0);
        layer.refresh_expansion();
        net.layers.push_back(std::move(layer));
    }
    return net;
}

void init_params(TiedMlp& net, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (TiedLayer& layer : net.layers) {
        const double bound =
            std::sqrt(6.0 / static_cast<double>(layer.shape.n_in + layer.shape.n_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : layer.free_weights) w = dist(rng);
        std::fill(layer.free_biases.begin(), layer.free_biases.end(), 0.0);
        layer.refresh_expansion();
    }
}

std::size_t count_free_parameters(const TiedMlp& net, bool weights_only) {
    std::size_t total = 0;
    for (const TiedLayer& l : net.layers) {
        total += l.free_weights.size();
        if (!weights_only) total += l.free_biases.size();
    }
    return total;
}

double loss_and_gradients(const TiedMlp& net, const Eigen::MatrixXd& inputs,
                          const std::vector<std::uint8_t>& labels, Gradients& grads) {
    const std::size_t batch = static_cast<std::size_t>(inputs.rows());
    if (labels.size() != batch) throw ValidationError("batch labels do not match inputs");
    if (net.layers.empty() || net.layers.back().activation != Activation::Softmax) {
        throw ValidationError("loss_and_gradients expects a softmax head");
    }

    std::vector<Eigen::MatrixXd> pre, post;
    forward_batch(net, inputs, &pre, &post);
    const Eigen::MatrixXd& probs = post.back();

    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) {
        const double p = std::max(probs(static_cast<Eigen::Index>(i), labels[i]), 1e-300);
        loss -= std::log(p);
    }
    loss /= static_cast<double>(batch);

    grads.weights.assign(net.layers.size(), {});
    grads.biases.assign(net.layers.size(), {});

    // dL/dZ for the softmax + cross-entropy head.
    Eigen::MatrixXd dz = probs;
    for (std::size_t i = 0; i < batch; ++i) {
        dz(static_cast<Eigen::Index>(i), labels[i]) -= 1.0;
    }
    dz /= static_cast<double>(batch);

    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const TiedLayer& layer = net.layers[k];
        const Eigen::MatrixXd& a_in = post[k];

        Eigen::MatrixXd gw = dz.transpose() * a_in;  // n_out x n_in
        Eigen::VectorXd gb = dz.colwise().sum().transpose();

        auto& gfw = grads.weights[k];
        gfw.assign(layer.free_weights.size(), 0.0);
        for (std::size_t n = 0; n < layer.shape.n_in; ++n) {
            const std::uint32_t* ids = layer.weight_partition.assignment.data() + n * layer.shape.n_out;
            for (std::size_t m = 0; m < layer.shape.n_out; ++m) {
                gfw[ids[m]] += gw(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
            }
        }
        auto& gfb = grads.biases[k];
        gfb.assign(layer.free_biases.size(), 0.0);
        for (std::size_t m = 0; m < layer.shape.n_out; ++m) {
            gfb[layer.bias_partition.assignment[m]] += gb(static_cast<Eigen::Index>(m));
        }

        if (k > 0) {
            Eigen::MatrixXd da = dz * layer.weight_matrix;  // batch x n_in
            const TiedLayer& prev = net.layers[k - 1];
            switch (prev.activation) {
                case Activation::Identity:
                    dz = std::move(da);
                    break;
                case Activation::Relu:
                    dz = (pre[k - 1].array() > 0.0).cast<double>() * da.array();
                    break;
                case Activation::Softmax:
                    throw ValidationError("softmax is only supported on the last layer");
            }
        }
    }
    return loss;
}

namespace {

Eigen::MatrixXd dataset_matrix(const LabeledDataset& data, const std::vector<std::size_t>& idx,
                               std::size_t lo, std::size_t hi) {
    const std::size_t dim = data.images.empty() ? 0 : data.images[0].size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(hi - lo), static_cast<Eigen::Index>(dim));
    for (std::size_t i = lo; i < hi; ++i) {
        const auto& img = data.images[idx[i]];
        for (std::size_t p = 0; p < dim; ++p) {
            m(static_cast<Eigen::Index>(i - lo), static_cast<Eigen::Index>(p)) = img[p];
        }
    }
    return m;
}

}  // namespace

double evaluate_accuracy(const TiedMlp& net, const LabeledDataset& data) {
    if (data.size() == 0) return 0.0;
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::size_t correct = 0;
    const std::size_t chunk = 256;
    for (std::size_t lo = 0; lo < data.size(); lo += chunk) {
        const std::size_t hi = std::min(data.size(), lo + chunk);
        Eigen::MatrixXd x = dataset_matrix(data, idx, lo, hi);
        Eigen::MatrixXd y = forward_batch(net, x);
        for (std::size_t i = lo; i < hi; ++i) {
            Eigen::Index best = 0;
            y.row(static_cast<Eigen::Index>(i - lo)).maxCoeff(&best);
            if (static_cast<std::size_t>(best) == data.labels[i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

TrainReport train(TiedMlp& net, const LabeledDataset& train_data, const LabeledDataset& val_data,
                  const TrainConfig& cfg) {
    if (net.layers.empty()) throw ValidationError("network has no layers");
    if (train_data.size() == 0) throw ValidationError("empty training set");
    const std::size_t in_dim = net.layers[0].shape.n_in;
    if (train_data.images[0].size() != in_dim) {
        throw ValidationError("training data does not match the network input width");
    }

    std::mt19937_64 rng(cfg.seed);
    std::vector<std::size_t> idx(train_data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;

    // Momentum buffers per layer.
    std::vector<std::vector<double>> vel_w, vel_b;
    for (const TiedLayer& l : net.layers) {
        vel_w.emplace_back(l.free_weights.size(), 0.0);
        vel_b.emplace_back(l.free_biases.size(), 0.0);
    }

    TrainReport report;
    Gradients grads;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(idx.begin(), idx.end(), rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t lo = 0; lo < idx.size(); lo += cfg.batch_size) {
            const std::size_t hi = std::min(idx.size(), lo + cfg.batch_size);
            Eigen::MatrixXd x = dataset_matrix(train_data, idx, lo, hi);
            std::vector<std::uint8_t> labels(hi - lo);
            for (std::size_t i = lo; i < hi; ++i) labels[i - lo] = train_data.labels[idx[i]];

            const double loss = loss_and_gradients(net, x, labels, grads);
            if (!std::isfinite(loss)) {
                throw Error("training aborted: non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " + std::to_string(batches));
            }
            loss_sum += loss;
            ++batches;

            for (std::size_t k = 0; k < net.layers.size(); ++k) {
                TiedLayer& layer = net.layers[k];
                for (std::size_t c = 0; c < layer.free_weights.size(); ++c) {
                    vel_w[k][c] = cfg.momentum * vel_w[k][c] + grads.weights[k][c];
                    layer.free_weights[c] -= cfg.learning_rate * vel_w[k][c];
                }
                for (std::size_t c = 0; c < layer.free_biases.size(); ++c) {
                    vel_b[k][c] = cfg.momentum * vel_b[k][c] + grads.biases[k][c];
                    layer.free_biases[c] -= cfg.learning_rate * vel_b[k][c];
                }
                layer.refresh_expansion();
            }
        }

        EpochStats stats;
        stats.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
        stats.val_accuracy = val_data.size() ? evaluate_accuracy(net, val_data) : 0.0;
        report.epochs.push_back(stats);
        report.max_val_accuracy = std::max(report.max_val_accuracy, stats.val_accuracy);
    }
    return report;
}

namespace {

template <typename Scalar, typename WeightOf, typename BiasOf>
std::vector<Scalar> forward_generic(const TiedMlp& net, std::vector<Scalar> a,
                                    WeightOf weight_of, BiasOf bias_of) {
    for (const TiedLayer& layer : net.layers) {
        std::vector<Scalar> z(layer.shape.n_out);
        for (std::size_t m = 0; m < layer.shape.n_out; ++m) z[m] = bias_of(layer, m);
        for (std::size_t n = 0; n < layer.shape.n_in; ++n) {
            const std::uint32_t* ids =
                layer.weight_partition.assignment.data() + n * layer.shape.n_out;
            for (std::size_t m = 0; m < layer.shape.n_out; ++m) {
                z[m] += weight_of(layer, ids[m]) * a[n];
            }
        }
        if (layer.activation == Activation::Relu) {
            for (Scalar& v : z) v = relu(v);
        }
        // A softmax head is order-preserving and permutation-equivariant, so
        // the exact check runs on the pre-softmax values.
        a = std::move(z);
    }
    return a;
}

}  // namespace

EquivarianceReport check_equivariance(const TiedMlp& net, const GroupAction& in_action,
                                      const GroupAction& out_action,
                                      const EquivarianceOptions& opts) {
    if (net.layers.empty()) throw ValidationError("network has no layers");
    if (in_action.domain_size() != net.layers.front().shape.n_in ||
        out_action.domain_size() != net.layers.back().shape.n_out) {
        throw ValidationError("action domains do not match the network boundaries");
    }
    if (in_action.group_ptr() != out_action.group_ptr()) {
        throw ValidationError("input and output actions must share a group");
    }

    const std::size_t order = in_action.group().order();
    std::mt19937_64 rng(opts.seed);

    std::vector<std::size_t> elements;
    EquivarianceReport report;
    if (order <= opts.exhaustive_cap) {
        elements.resize(order);
        for (std::size_t i = 0; i < order; ++i) elements[i] = i;
        report.exhaustive = true;
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, order - 1);
        elements.resize(std::max<std::size_t>(opts.sampled_elements, 1));
        for (auto& e : elements) e = pick(rng);
        report.exhaustive = false;
    }
    report.elements_checked = elements.size();

    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<std::vector<double>> probes(opts.probes);
    for (auto& p : probes) {
        p.resize(in_action.domain_size());
        for (double& v : p) v = dist(rng);
    }

    for (std::size_t e : elements) {
        double worst = 0.0;
        for (const auto& x : probes) {
            const std::vector<double> lhs = net.forward(apply_perm(in_action.perm(e), x));
            const std::vector<double> rhs = apply_perm(out_action.perm(e), net.forward(x));
            double num = 0.0, mag = 1.0;
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                num = std::max(num, std::abs(lhs[i] - rhs[i]));
                mag = std::max({mag, std::abs(lhs[i]), std::abs(rhs[i])});
            }
            worst = std::max(worst, num / mag);
        }
        report.max_deviation = std::max(report.max_deviation, worst);
        if (worst > opts.tolerance) report.failing_elements.push_back(e);
    }
    report.passed = report.failing_elements.empty();
    return report;
}

EquivarianceReport check_equivariance_exact(const TiedMlp& net, const GroupAction& in_action,
                                            const GroupAction& out_action,
                                            const EquivarianceOptions& opts) {
    if (net.layers.empty()) throw ValidationError("network has no layers");
    if (in_action.group_ptr() != out_action.group_ptr()) {
        throw ValidationError("input and output actions must share a group");
    }

    // Convert every free parameter once; throws if any is not a small dyadic.
    std::vector<std::vector<Rational>> rw(net.layers.size()), rb(net.layers.size());
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        for (double w : net.layers[k].free_weights) rw[k].push_back(Rational::from_double(w));
        for (double b : net.layers[k].free_biases) rb[k].push_back(Rational::from_double(b));
    }
    auto layer_index = [&](const TiedLayer& l) {
        return static_cast<std::size_t>(&l - net.layers.data());
    };
    auto weight_of = [&](const TiedLayer& l, std::uint32_t id) { return rw[layer_index(l)][id]; };
    auto bias_of = [&](const TiedLayer& l, std::size_t m) {
        return rb[layer_index(l)][l.bias_partition.assignment[m]];
    };

    const std::size_t order = in_action.group().order();
    std::mt19937_64 rng(opts.seed);

    std::vector<std::size_t> elements;
    EquivarianceReport report;
    if (order <= opts.exhaustive_cap) {
        elements.resize(order);
        for (std::size_t i = 0; i < order; ++i) elements[i] = i;
        report.exhaustive = true;
    } else {
        std::uniform_int_distribution<std::size_t> pick(0, order - 1);
        elements.resize(std::max<std::size_t>(opts.sampled_elements, 1));
        for (auto& e : elements) e = pick(rng);
    }
    report.elements_checked = elements.size();

    std::uniform_int_distribution<int> dist(-4, 4);
    std::vector<std::vector<Rational>> probes(opts.probes);
    for (auto& p : probes) {
        p.resize(in_action.domain_size());
        for (Rational& v : p) v = Rational(dist(rng));
    }

    for (std::size_t e : elements) {
        bool element_ok = true;
        for (const auto& x : probes) {
            const auto lhs =
                forward_generic<Rational>(net, apply_perm(in_action.perm(e), x), weight_of, bias_of);
            const auto rhs =
                apply_perm(out_action.perm(e), forward_generic<Rational>(net, x, weight_of, bias_of));
            for (std::size_t i = 0; i < lhs.size(); ++i) {
                if (!(lhs[i] == rhs[i])) {
                    element_ok = false;
                    report.max_deviation =
                        std::max(report.max_deviation,
                                 std::abs(lhs[i].to_double() - rhs[i].to_double()));
                }
            }
        }
        if (!element_ok) report.failing_elements.push_back(e);
    }
    report.passed = report.failing_elements.empty();
    return report;
}

namespace {

void write_f64_le(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(buf), 8);
}

double read_f64_le(std::istream& in, std::size_t offset) {
    unsigned char buf[8];
    if (!in.read(reinterpret_cast<char*>(buf), 8)) {
        throw ParseError("parameter blob truncated", offset);
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

}  // namespace

std::vector<std::filesystem::path> checkpoint_files(const TiedMlp& net,
                                                    const std::filesystem::path& prefix) {
    std::vector<std::filesystem::path> files;
    files.push_back(prefix.string() + ".json");
    files.push_back(prefix.string() + ".params.bin");
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        files.push_back(prefix.string() + ".L" + std::to_string(k) + ".orb");
        files.push_back(prefix.string() + ".L" + std::to_string(k) + ".bias.orb");
    }
    return files;
}

void save_checkpoint(const TiedMlp& net, const std::filesystem::path& prefix,
                     const nlohmann::json& extra_manifest) {
    if (net.layers.empty()) throw ValidationError("cannot checkpoint an empty network");
    const std::string stem = prefix.filename().string();

    nlohmann::json manifest;
    manifest["format"] = "aeq-checkpoint-1";
    manifest["widths"] = net.widths();
    manifest["params"] = stem + ".params.bin";
    manifest["layers"] = nlohmann::json::array();
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const TiedLayer& l = net.layers[k];
        nlohmann::json jl;
        jl["activation"] = to_string(l.activation);
        jl["weights_partition"] = stem + ".L" + std::to_string(k) + ".orb";
        jl["bias_partition"] = stem + ".L" + std::to_string(k) + ".bias.orb";
        jl["free_weights"] = l.free_weights.size();
        jl["free_biases"] = l.free_biases.size();
        manifest["layers"].push_back(jl);
        save_partition(l.weight_partition, prefix.string() + ".L" + std::to_string(k) + ".orb");
        save_partition(l.bias_partition, prefix.string() + ".L" + std::to_string(k) + ".bias.orb");
    }
    if (!extra_manifest.is_null()) manifest["run"] = extra_manifest;

    std::ofstream params(prefix.string() + ".params.bin", std::ios::binary);
    if (!params) throw Error("cannot write parameter blob");
    for (const TiedLayer& l : net.layers) {
        for (double w : l.free_weights) write_f64_le(params, w);
        for (double b : l.free_biases) write_f64_le(params, b);
    }
    if (!params) throw Error("failed writing parameter blob");

    std::ofstream mf(prefix.string() + ".json", std::ios::binary);
    if (!mf) throw Error("cannot write checkpoint manifest");
    mf << manifest.dump(2) << '\n';
}

TiedMlp load_checkpoint(const std::filesystem::path& prefix) {
    const std::filesystem::path manifest_path = prefix.string() + ".json";
    std::ifstream mf(manifest_path, std::ios::binary);
    if (!mf) throw Error("cannot open checkpoint manifest: " + manifest_path.string());
    nlohmann::json manifest;
    try {
        mf >> manifest;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad checkpoint manifest: ") + e.what(), 0);
    }
    if (manifest.value("format", "") != "aeq-checkpoint-1") {
        throw ParseError("unknown checkpoint format", 0);
    }
    const std::filesystem::path dir = prefix.has_parent_path()
                                          ? prefix.parent_path()
                                          : std::filesystem::path(".");

    TiedMlp net;
    const auto widths = manifest.at("widths").get<std::vector<std::size_t>>();
    const auto& jlayers = manifest.at("layers");
    if (widths.size() != jlayers.size() + 1) {
        throw ParseError("checkpoint widths do not chain with the layer count", 0);
    }

    std::ifstream params(dir / manifest.at("params").get<std::string>(), std::ios::binary);
    if (!params) throw Error("cannot open checkpoint parameter blob");

    std::size_t offset = 0;
    for (std::size_t k = 0; k < jlayers.size(); ++k) {
        const auto& jl = jlayers[k];
        TiedLayer layer;
        layer.shape = LayerShape::of(widths[k], widths[k + 1]);
        layer.activation = activation_from_string(jl.at("activation").get<std::string>());
        layer.weight_partition = load_partition(dir / jl.at("weights_partition").get<std::string>());
        layer.bias_partition = load_partition(dir / jl.at("bias_partition").get<std::string>());
        if (layer.weight_partition.size() != layer.shape.edge_count() ||
            layer.bias_partition.size() != layer.shape.n_out) {
            throw ParseError("checkpoint partition sizes do not match the architecture", 0);
        }
        layer.free_weights.resize(jl.at("free_weights").get<std::size_t>());
        layer.free_biases.resize(jl.at("free_biases").get<std::size_t>());
        if (layer.free_weights.size() != layer.weight_partition.orbit_count ||
            layer.free_biases.size() != layer.bias_partition.orbit_count) {
            throw ParseError("checkpoint free-parameter counts do not match partitions", 0);
        }
        for (double& w : layer.free_weights) w = read_f64_le(params, offset), offset += 8;
        for (double& b : layer.free_biases) b = read_f64_le(params, offset), offset += 8;
        layer.refresh_expansion();
        net.layers.push_back(std::move(layer));
    }
    return net;
}

}  // namespace aeq

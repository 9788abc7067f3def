#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "aeq/dataset.hpp"
#include "aeq/orbits.hpp"

namespace aeq {

enum class Activation { Identity, Relu, Softmax };

std::string to_string(Activation a);
Activation activation_from_string(const std::string& s);

/// A fully connected layer whose weights are looked up from free parameters
/// through an orbit assignment: W[edge] = free_weights[I[edge]], and bias
/// b[m] = free_biases[bias_I[m]].
struct TiedLayer {
    LayerShape shape;
    OrbitPartition weight_partition;  // over edges
    OrbitPartition bias_partition;    // over output nodes
    std::vector<double> free_weights;
    std::vector<double> free_biases;
    Activation activation = Activation::Identity;

    // Dense caches of the expanded parameters, rebuilt after every update.
    Eigen::MatrixXd weight_matrix;  // n_out x n_in
    Eigen::VectorXd bias_vector;

    void refresh_expansion();
    double weight(std::size_t n, std::size_t m) const {
        return free_weights[weight_partition.assignment[edge_index(shape, n, m)]];
    }
};

struct TiedMlp {
    std::vector<TiedLayer> layers;

    std::vector<std::size_t> widths() const;
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    std::vector<double> forward(const std::vector<double>& x) const;
};

/// One group's node actions across every boundary of a network:
/// boundaries[0] acts on the input nodes, boundaries[k] on the nodes between
/// layers k-1 and k, the last on the output nodes.
struct NodeActionPlan {
    std::vector<GroupAction> boundaries;
};

/// The standard classifier plan for an image symmetry group: natural pixel
/// action on the input, regular-block actions on hidden widths (each must be
/// divisible by the group order), trivial action on the class logits.
NodeActionPlan classifier_plan(GroupPtr group, const std::vector<std::size_t>& widths);

/// Closes several plans over one combined group: every element of every
/// plan's group becomes a generator acting on all boundaries at once, and
/// the result is one plan over the generated group.
NodeActionPlan close_plans(std::span<const NodeActionPlan> plans, const GroupLimits& limits = {});

/// Builds the tied network: per layer, the weight partition is the frontier
/// orbit construction over all plans' edge actions and the bias partition is
/// the node-orbit partition of the output boundary. No plans means a fully
/// untied network. Parameters are zero until init_params.
TiedMlp build_tied_mlp(const std::vector<std::size_t>& widths,
                       std::span<const NodeActionPlan> plans,
                       std::vector<Activation> activations = {});

/// Per free weight: uniform in +-sqrt(6 / (n_in + n_out)); biases zero.
void init_params(TiedMlp& net, std::uint64_t seed);

/// Sum over layers of free weight count, plus free bias count unless
/// weights_only.
std::size_t count_free_parameters(const TiedMlp& net, bool weights_only = false);

struct TrainConfig {
    double learning_rate = 1e-3;
    double momentum = 0.9;
    std::size_t batch_size = 64;
    std::size_t epochs = 4;
    std::uint64_t seed = 0;
};

struct EpochStats {
    double train_loss = 0.0;
    double val_accuracy = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    double max_val_accuracy = 0.0;
};

/// SGD with momentum on the free parameters; per-edge gradients accumulate
/// over each orbit. Aborts with Error on non-finite loss.
TrainReport train(TiedMlp& net, const LabeledDataset& train_data, const LabeledDataset& val_data,
                  const TrainConfig& cfg);

double evaluate_accuracy(const TiedMlp& net, const LabeledDataset& data);

/// Free-parameter gradients, exposed for the finite-difference tests.
struct Gradients {
    std::vector<std::vector<double>> weights;  // per layer
    std::vector<std::vector<double>> biases;
};

/// Mean cross-entropy over the batch plus gradients w.r.t. free parameters.
double loss_and_gradients(const TiedMlp& net, const Eigen::MatrixXd& inputs,
                          const std::vector<std::uint8_t>& labels, Gradients& grads);

struct EquivarianceOptions {
    std::size_t probes = 10;
    double tolerance = 1e-6;
    std::uint64_t seed = 0;
    std::size_t exhaustive_cap = 256;  // check every element if the order fits
    std::size_t sampled_elements = 500;
};

struct EquivarianceReport {
    bool passed = false;
    double max_deviation = 0.0;  // relative to max(1, output magnitude)
    std::size_t elements_checked = 0;
    bool exhaustive = false;
    std::vector<std::size_t> failing_elements;
};

/// Asserts forward(in_g(x)) == out_g(forward(x)) over probe inputs for every
/// group element (or a seeded sample above the cap). Failures are report
/// content, never exceptions.
EquivarianceReport check_equivariance(const TiedMlp& net, const GroupAction& in_action,
                                      const GroupAction& out_action,
                                      const EquivarianceOptions& opts = {});

/// Same check in exact rational arithmetic with small integer probes; any
/// deviation at all fails. Requires dyadic parameters; a softmax head is
/// evaluated as identity.
EquivarianceReport check_equivariance_exact(const TiedMlp& net, const GroupAction& in_action,
                                            const GroupAction& out_action,
                                            const EquivarianceOptions& opts = {});

/// Checkpoint: "<prefix>.json" manifest + "<prefix>.params.bin" little-endian
/// f64 blob + one partition file per layer, all referenced by relative name.
void save_checkpoint(const TiedMlp& net, const std::filesystem::path& prefix,
                     const nlohmann::json& extra_manifest);
TiedMlp load_checkpoint(const std::filesystem::path& prefix);
std::vector<std::filesystem::path> checkpoint_files(const TiedMlp& net,
                                                    const std::filesystem::path& prefix);

}  // namespace aeq

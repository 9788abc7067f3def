#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "aeq/tied_mlp.hpp"
#include "aeq/transforms.hpp"

namespace aeq {

/// Binary equivariance configuration: bit i set means equivariance to the
/// i-th menu group is induced.
struct SearchState {
    std::vector<std::uint8_t> bits;

    static SearchState zeros(std::size_t g_size) { return SearchState{std::vector<std::uint8_t>(g_size, 0)}; }
    std::size_t size() const { return bits.size(); }
    SearchState toggled(std::size_t index) const;

    bool operator==(const SearchState&) const = default;
};

struct SearchStateHash {
    std::size_t operator()(const SearchState& s) const;
};

struct ToggleAction {
    std::size_t index = 0;
};

struct Transition {
    SearchState state;
    std::size_t action = 0;
    double reward = 0.0;
    SearchState next;
};

/// Fixed-capacity FIFO of transitions with uniform sampling (with
/// replacement).
class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}
    void push(Transition t);
    std::size_t size() const { return items_.size(); }
    const Transition& sample(std::mt19937_64& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Transition> items_;
};

/// The paper's accuracy-gap amplification: x * exp(|x|) with
/// x = acc - acc0. Strictly increasing in acc, antisymmetric about acc0.
double reward_from_accuracy(double acc, double acc0);

struct QNetConfig {
    std::vector<std::size_t> dims;  // input, hidden..., output; empty = g x 400 x 400 x 400 x g
    double learning_rate = 1e-3;
    double momentum = 0.9;
};

/// Plain dense MLP over state bits producing one Q-value per toggle action.
/// ReLU hidden layers, identity output, SGD-momentum training on one-step
/// TD targets.
class QNet {
public:
    QNet(std::vector<std::size_t> dims, std::uint64_t seed, double learning_rate = 1e-3,
         double momentum = 0.9);

    Eigen::VectorXd values(const SearchState& s) const;

    /// Mean squared error (halved) of Q(state)[action] against the targets,
    /// plus parameter gradients; exposed for the finite-difference tests.
    double loss_and_gradients(const std::vector<SearchState>& states,
                              const std::vector<std::size_t>& actions,
                              const std::vector<double>& targets,
                              std::vector<Eigen::MatrixXd>& grad_w,
                              std::vector<Eigen::VectorXd>& grad_b) const;

    /// One SGD-momentum step on a minibatch with targets r + gamma * max Q(next).
    void td_step(const std::vector<const Transition*>& batch, double gamma);

    std::vector<Eigen::MatrixXd>& weights() { return w_; }
    std::vector<Eigen::VectorXd>& biases() { return b_; }
    const std::vector<std::size_t>& dims() const { return dims_; }

private:
    Eigen::MatrixXd forward_cached(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& pre,
                                   std::vector<Eigen::MatrixXd>& post) const;

    std::vector<std::size_t> dims_;
    double lr_;
    double momentum_;
    std::vector<Eigen::MatrixXd> w_;
    std::vector<Eigen::VectorXd> b_;
    std::vector<Eigen::MatrixXd> vw_;
    std::vector<Eigen::VectorXd> vb_;
};

/// Child evaluator: maps a state to a validation accuracy in [0, 1].
/// Implementations must be deterministic given (state, seed).
class RewardOracle {
public:
    virtual ~RewardOracle() = default;
    virtual double evaluate(const SearchState& state, std::uint64_t seed) = 0;
    /// Accuracy of the all-zeros (no equivariance) state.
    virtual double baseline_accuracy() = 0;
};

/// Synthetic oracle with a planted optimum: accuracy grows by `step` for
/// every bit agreeing with the hidden mask, so the unique maximum sits at
/// the mask itself.
class PlantedOracle : public RewardOracle {
public:
    PlantedOracle(std::vector<std::uint8_t> mask, double base = 0.5, double step = 0.02);
    double evaluate(const SearchState& state, std::uint64_t seed) override;
    double baseline_accuracy() override;

private:
    std::vector<std::uint8_t> mask_;
    double base_;
    double step_;
};

/// Trains a tied child classifier for the selected groups and returns the
/// maximum validation accuracy across epochs. Group/architecture
/// compatibility (regular-block divisibility) is checked at construction.
class MlpRewardOracle : public RewardOracle {
public:
    MlpRewardOracle(LabeledDataset train, LabeledDataset val, std::vector<TransformGroup> menu,
                    std::vector<std::size_t> widths, TrainConfig child_cfg);
    double evaluate(const SearchState& state, std::uint64_t seed) override;
    double baseline_accuracy() override;
    std::size_t g_size() const { return plans_.size(); }

private:
    LabeledDataset train_;
    LabeledDataset val_;
    std::vector<NodeActionPlan> plans_;  // one per menu group
    std::vector<std::size_t> widths_;
    TrainConfig cfg_;
    double baseline_ = -1.0;  // computed on first use
};

struct EpsilonStage {
    double epsilon = 1.0;
    std::size_t models = 0;
};

/// 200 models at eps 1.0, 100 each at 0.9..0.4, 50 each at 0.3..0.05
/// (1,000 total).
std::vector<EpsilonStage> gemlp_schedule();
/// 50 models at each of 1.0, 0.9, ..., 0.1, 0.05, 0.01 (600 total).
std::vector<EpsilonStage> gcnn_schedule();

struct SearchConfig {
    std::size_t g_size = 12;
    std::vector<EpsilonStage> schedule = gemlp_schedule();
    double gamma = 0.5;
    std::size_t replay_capacity = 10000;
    std::size_t batch_size = 512;
    std::size_t horizon = 0;  // steps per episode; 0 means g_size
    std::size_t updates_per_model = 1;
    QNetConfig qnet;
    double failed_reward = -1.0;
    std::size_t top_k = 5;
    std::uint64_t seed = 0;
    std::uint64_t child_seed = 0;

    std::size_t total_models() const;
};

struct ModelRecord {
    std::size_t index = 0;
    double epsilon = 1.0;
    SearchState state;  // the child evaluated at this step (post-toggle)
    double accuracy = 0.0;
    double reward = 0.0;
    bool failed = false;
    bool memoized = false;
};

struct EpsilonSummary {
    double epsilon = 1.0;
    std::size_t models = 0;
    double mean_accuracy = 0.0;  // over non-failed records
};

struct TopState {
    SearchState state;
    double accuracy = 0.0;
    double reward = 0.0;
};

struct SearchReport {
    std::vector<ModelRecord> records;
    std::vector<EpsilonSummary> per_epsilon;
    std::vector<TopState> top_states;  // deduplicated, best reward first
    double baseline_accuracy = 0.0;
    std::size_t oracle_evaluations = 0;
    std::size_t failed_evaluations = 0;
};

/// Epsilon-greedy deep Q-learning over toggle actions with experience
/// replay and per-state memoization of oracle accuracies. Episodes start at
/// the all-zeros state and persist for `horizon` steps; every step counts
/// as one model against the schedule.
SearchReport run_search(const SearchConfig& cfg, RewardOracle& oracle);

void write_search_report_jsonl(const SearchReport& report, const std::filesystem::path& path);
void write_search_summary_json(const SearchReport& report, const std::filesystem::path& path);

}  // namespace aeq

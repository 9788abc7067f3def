#include "aeq/search.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "aeq/errors.hpp"

namespace aeq {

SearchState SearchState::toggled(std::size_t index) const {
    if (index >= bits.size()) throw ValidationError("toggle index out of range");
    SearchState s = *this;
    s.bits[index] ^= 1;
    return s;
}

std::size_t SearchStateHash::operator()(const SearchState& s) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::uint8_t b : s.bits) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
}

void ReplayBuffer::push(Transition t) {
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
        items_.push_back(std::move(t));
    } else {
        items_[next_] = std::move(t);
        next_ = (next_ + 1) % capacity_;
    }
}

const Transition& ReplayBuffer::sample(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    return items_[pick(rng)];
}

double reward_from_accuracy(double acc, double acc0) {
    const double x = acc - acc0;
    return x * std::exp(std::abs(x));
}

namespace {

Eigen::VectorXd state_vector(const SearchState& s) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) v(static_cast<Eigen::Index>(i)) = s.bits[i];
    return v;
}

}  // namespace

QNet::QNet(std::vector<std::size_t> dims, std::uint64_t seed, double learning_rate,
           double momentum)
    : dims_(std::move(dims)), lr_(learning_rate), momentum_(momentum) {
    if (dims_.size() < 2) throw ConfigError("Q-network needs at least two dims");
    std::mt19937_64 rng(seed);
    for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
        const auto rows = static_cast<Eigen::Index>(dims_[k + 1]);
        const auto cols = static_cast<Eigen::Index>(dims_[k]);
        const double bound = std::sqrt(6.0 / static_cast<double>(dims_[k] + dims_[k + 1]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = dist(rng);
        }
        w_.push_back(std::move(w));
        // Small positive bias keeps ReLU units live on the all-zeros state.
        b_.push_back(Eigen::VectorXd::Constant(rows, 0.01));
        vw_.push_back(Eigen::MatrixXd::Zero(rows, cols));
        vb_.push_back(Eigen::VectorXd::Zero(rows));
    }
}

Eigen::MatrixXd QNet::forward_cached(const Eigen::MatrixXd& x, std::vector<Eigen::MatrixXd>& pre,
                                     std::vector<Eigen::MatrixXd>& post) const {
    Eigen::MatrixXd a = x;
    post.push_back(a);
    for (std::size_t k = 0; k < w_.size(); ++k) {
        Eigen::MatrixXd z = a * w_[k].transpose();
        z.rowwise() += b_[k].transpose();
        pre.push_back(z);
        if (k + 1 < w_.size()) z = z.cwiseMax(0.0);
        a = std::move(z);
        post.push_back(a);
    }
    return a;
}

Eigen::VectorXd QNet::values(const SearchState& s) const {
    std::vector<Eigen::MatrixXd> pre, post;
    Eigen::MatrixXd row = state_vector(s).transpose();
    return forward_cached(row, pre, post).row(0).transpose();
}

double QNet::loss_and_gradients(const std::vector<SearchState>& states,
                                const std::vector<std::size_t>& actions,
                                const std::vector<double>& targets,
                                std::vector<Eigen::MatrixXd>& grad_w,
                                std::vector<Eigen::VectorXd>& grad_b) const {
    const std::size_t batch = states.size();
    if (actions.size() != batch || targets.size() != batch || batch == 0) {
        throw ValidationError("TD batch components disagree");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(batch), static_cast<Eigen::Index>(dims_[0]));
    for (std::size_t i = 0; i < batch; ++i) {
        x.row(static_cast<Eigen::Index>(i)) = state_vector(states[i]).transpose();
    }

    std::vector<Eigen::MatrixXd> pre, post;
    Eigen::MatrixXd q = forward_cached(x, pre, post);

    // Halved MSE on the chosen action values only.
    double loss = 0.0;
    Eigen::MatrixXd dz = Eigen::MatrixXd::Zero(q.rows(), q.cols());
    for (std::size_t i = 0; i < batch; ++i) {
        const double diff =
            q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(actions[i])) - targets[i];
        loss += 0.5 * diff * diff;
        dz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(actions[i])) =
            diff / static_cast<double>(batch);
    }
    loss /= static_cast<double>(batch);

    grad_w.assign(w_.size(), Eigen::MatrixXd());
    grad_b.assign(b_.size(), Eigen::VectorXd());
    for (std::size_t k = w_.size(); k-- > 0;) {
        grad_w[k] = dz.transpose() * post[k];
        grad_b[k] = dz.colwise().sum().transpose();
        if (k > 0) {
            Eigen::MatrixXd da = dz * w_[k];
            dz = (pre[k - 1].array() > 0.0).cast<double>() * da.array();
        }
    }
    return loss;
}

void QNet::td_step(const std::vector<const Transition*>& batch, double gamma) {
    if (batch.empty()) return;
    std::vector<SearchState> states;
    std::vector<std::size_t> actions;
    std::vector<double> targets;
    states.reserve(batch.size());
    for (const Transition* t : batch) {
        states.push_back(t->state);
        actions.push_back(t->action);
        targets.push_back(t->reward + gamma * values(t->next).maxCoeff());
    }
    std::vector<Eigen::MatrixXd> gw;
    std::vector<Eigen::VectorXd> gb;
    loss_and_gradients(states, actions, targets, gw, gb);
    for (std::size_t k = 0; k < w_.size(); ++k) {
        vw_[k] = momentum_ * vw_[k] + gw[k];
        vb_[k] = momentum_ * vb_[k] + gb[k];
        w_[k] -= lr_ * vw_[k];
        b_[k] -= lr_ * vb_[k];
    }
}

PlantedOracle::PlantedOracle(std::vector<std::uint8_t> mask, double base, double step)
    : mask_(std::move(mask)), base_(base), step_(step) {
    if (base_ + step_ * static_cast<double>(mask_.size()) > 1.0) {
        throw ConfigError("planted oracle would exceed accuracy 1.0 at the optimum");
    }
}

double PlantedOracle::evaluate(const SearchState& state, std::uint64_t) {
    if (state.size() != mask_.size()) {
        throw ValidationError("state length does not match the planted mask");
    }
    std::size_t matches = 0;
    for (std::size_t i = 0; i < mask_.size(); ++i) {
        if (state.bits[i] == mask_[i]) ++matches;
    }
    return base_ + step_ * static_cast<double>(matches);
}

double PlantedOracle::baseline_accuracy() {
    return evaluate(SearchState::zeros(mask_.size()), 0);
}

MlpRewardOracle::MlpRewardOracle(LabeledDataset train, LabeledDataset val,
                                 std::vector<TransformGroup> menu, std::vector<std::size_t> widths,
                                 TrainConfig child_cfg)
    : train_(std::move(train)), val_(std::move(val)), widths_(std::move(widths)), cfg_(child_cfg) {
    if (widths_.size() < 2) throw ConfigError("child architecture needs at least two widths");
    // classifier_plan verifies input degree and hidden divisibility per
    // group, so incompatible menus fail here rather than mid-search.
    for (const TransformGroup& g : menu) {
        plans_.push_back(classifier_plan(g.group, widths_));
    }
    if (train_.size() == 0 || val_.size() == 0) {
        throw ConfigError("reward oracle needs non-empty train and validation sets");
    }
    if (train_.images[0].size() != widths_.front()) {
        throw ConfigError("dataset width does not match the child architecture");
    }
}

double MlpRewardOracle::evaluate(const SearchState& state, std::uint64_t seed) {
    if (state.size() != plans_.size()) {
        throw ValidationError("state length does not match the group menu");
    }
    std::vector<NodeActionPlan> selected;
    for (std::size_t i = 0; i < plans_.size(); ++i) {
        if (state.bits[i]) selected.push_back(plans_[i]);
    }
    TiedMlp net = build_tied_mlp(widths_, selected);
    init_params(net, seed);
    TrainConfig cfg = cfg_;
    cfg.seed = seed;
    TrainReport report = train(net, train_, val_, cfg);
    return report.max_val_accuracy;
}

double MlpRewardOracle::baseline_accuracy() {
    if (baseline_ < 0.0) {
        baseline_ = evaluate(SearchState::zeros(plans_.size()), cfg_.seed);
    }
    return baseline_;
}

std::vector<EpsilonStage> gemlp_schedule() {
    return {{1.0, 200}, {0.9, 100}, {0.8, 100}, {0.7, 100}, {0.6, 100}, {0.5, 100},
            {0.4, 100}, {0.3, 50},  {0.2, 50},  {0.1, 50},  {0.05, 50}};
}

std::vector<EpsilonStage> gcnn_schedule() {
    return {{1.0, 50}, {0.9, 50}, {0.8, 50}, {0.7, 50}, {0.6, 50},  {0.5, 50},
            {0.4, 50}, {0.3, 50}, {0.2, 50}, {0.1, 50}, {0.05, 50}, {0.01, 50}};
}

std::size_t SearchConfig::total_models() const {
    std::size_t total = 0;
    for (const EpsilonStage& s : schedule) total += s.models;
    return total;
}

SearchReport run_search(const SearchConfig& cfg, RewardOracle& oracle) {
    if (cfg.g_size == 0) throw ConfigError("search needs at least one group bit");
    std::mt19937_64 rng(cfg.seed);

    std::vector<std::size_t> dims = cfg.qnet.dims;
    if (dims.empty()) dims = {cfg.g_size, 400, 400, 400, cfg.g_size};
    if (dims.front() != cfg.g_size || dims.back() != cfg.g_size) {
        throw ConfigError("Q-network dims must start and end with g_size");
    }
    QNet qnet(dims, cfg.seed ^ 0x9e3779b97f4a7c15ull, cfg.qnet.learning_rate, cfg.qnet.momentum);
    ReplayBuffer replay(cfg.replay_capacity);

    struct MemoEntry {
        double accuracy = 0.0;
        bool failed = false;
    };
    std::unordered_map<SearchState, MemoEntry, SearchStateHash> memo;

    SearchReport report;
    report.baseline_accuracy = oracle.baseline_accuracy();

    const std::size_t horizon = cfg.horizon ? cfg.horizon : cfg.g_size;
    SearchState state = SearchState::zeros(cfg.g_size);
    std::size_t steps_in_episode = 0;
    std::size_t model_index = 0;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> any_action(0, cfg.g_size - 1);

    for (const EpsilonStage& stage : cfg.schedule) {
        for (std::size_t m = 0; m < stage.models; ++m) {
            if (steps_in_episode == horizon) {
                state = SearchState::zeros(cfg.g_size);
                steps_in_episode = 0;
            }

            std::size_t action;
            if (unit(rng) < stage.epsilon) {
                action = any_action(rng);
            } else {
                const Eigen::VectorXd q = qnet.values(state);
                const double best = q.maxCoeff();
                std::vector<std::size_t> argmax;
                for (Eigen::Index i = 0; i < q.size(); ++i) {
                    if (q(i) == best) argmax.push_back(static_cast<std::size_t>(i));
                }
                std::uniform_int_distribution<std::size_t> pick(0, argmax.size() - 1);
                action = argmax[pick(rng)];
            }
            const SearchState next = state.toggled(action);

            ModelRecord record;
            record.index = model_index;
            record.epsilon = stage.epsilon;
            record.state = next;

            auto it = memo.find(next);
            if (it != memo.end()) {
                record.memoized = true;
                record.failed = it->second.failed;
                record.accuracy = it->second.accuracy;
            } else {
                MemoEntry entry;
                try {
                    entry.accuracy = oracle.evaluate(next, cfg.child_seed);
                    ++report.oracle_evaluations;
                } catch (const std::exception&) {
                    entry.failed = true;
                    ++report.oracle_evaluations;
                    ++report.failed_evaluations;
                }
                memo.emplace(next, entry);
                record.failed = entry.failed;
                record.accuracy = entry.accuracy;
            }
            record.reward = record.failed
                                ? cfg.failed_reward
                                : reward_from_accuracy(record.accuracy, report.baseline_accuracy);
            report.records.push_back(record);

            replay.push(Transition{state, action, record.reward, next});
            for (std::size_t u = 0; u < cfg.updates_per_model; ++u) {
                std::vector<const Transition*> batch;
                const std::size_t want = std::min(cfg.batch_size, replay.size());
                batch.reserve(want);
                for (std::size_t i = 0; i < want; ++i) batch.push_back(&replay.sample(rng));
                qnet.td_step(batch, cfg.gamma);
            }

            state = next;
            ++steps_in_episode;
            ++model_index;
        }
    }

    // Per-epsilon accuracy means over the models that evaluated cleanly.
    for (const EpsilonStage& stage : cfg.schedule) {
        EpsilonSummary s;
        s.epsilon = stage.epsilon;
        double sum = 0.0;
        std::size_t n = 0;
        for (const ModelRecord& r : report.records) {
            if (r.epsilon == stage.epsilon) {
                ++s.models;
                if (!r.failed) {
                    sum += r.accuracy;
                    ++n;
                }
            }
        }
        s.mean_accuracy = n ? sum / static_cast<double>(n) : 0.0;
        report.per_epsilon.push_back(s);
    }

    std::unordered_map<SearchState, TopState, SearchStateHash> best;
    for (const ModelRecord& r : report.records) {
        if (r.failed) continue;
        auto [it, inserted] = best.try_emplace(r.state, TopState{r.state, r.accuracy, r.reward});
        if (!inserted && r.reward > it->second.reward) {
            it->second = TopState{r.state, r.accuracy, r.reward};
        }
    }
    report.top_states.reserve(best.size());
    for (auto& [_, top] : best) report.top_states.push_back(top);
    std::sort(report.top_states.begin(), report.top_states.end(),
              [](const TopState& a, const TopState& b) {
                  if (a.reward != b.reward) return a.reward > b.reward;
                  return a.state.bits < b.state.bits;
              });
    if (report.top_states.size() > cfg.top_k) report.top_states.resize(cfg.top_k);
    return report;
}

namespace {

nlohmann::json state_json(const SearchState& s) {
    nlohmann::json bits = nlohmann::json::array();
    for (std::uint8_t b : s.bits) bits.push_back(static_cast<int>(b));
    return bits;
}

}  // namespace

void write_search_report_jsonl(const SearchReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write search report: " + path.string());
    for (const ModelRecord& r : report.records) {
        nlohmann::json j;
        j["model"] = r.index;
        j["epsilon"] = r.epsilon;
        j["state"] = state_json(r.state);
        j["accuracy"] = r.accuracy;
        j["reward"] = r.reward;
        j["failed"] = r.failed;
        j["memoized"] = r.memoized;
        out << j.dump() << '\n';
    }
}

void write_search_summary_json(const SearchReport& report, const std::filesystem::path& path) {
    nlohmann::json j;
    j["baseline_accuracy"] = report.baseline_accuracy;
    j["models"] = report.records.size();
    j["oracle_evaluations"] = report.oracle_evaluations;
    j["failed_evaluations"] = report.failed_evaluations;
    j["per_epsilon"] = nlohmann::json::array();
    for (const EpsilonSummary& s : report.per_epsilon) {
        j["per_epsilon"].push_back(
            {{"epsilon", s.epsilon}, {"models", s.models}, {"mean_accuracy", s.mean_accuracy}});
    }
    j["top_states"] = nlohmann::json::array();
    for (const TopState& t : report.top_states) {
        j["top_states"].push_back(
            {{"state", state_json(t.state)}, {"accuracy", t.accuracy}, {"reward", t.reward}});
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write search summary: " + path.string());
    out << j.dump(2) << '\n';
}

}  // namespace aeq

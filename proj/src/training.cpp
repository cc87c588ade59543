#include "risknet/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "risknet/error.hpp"
#include "risknet/rng.hpp"

namespace risknet {

void validate(const TrainConfig& c) {
    validate(c.hyper);
    if (c.batch_size < 1) throw ParameterError("batch_size must be >= 1");
    if (!(c.lr0 > 0.0)) throw ParameterError("learning rate must be positive");
    if (c.warm_epochs < 0) throw ParameterError("warm_epochs must be non-negative");
    if (!(c.decay > 0.0 && c.decay <= 1.0)) throw ParameterError("decay must lie in (0, 1]");
    if (c.max_epochs < 1) throw ParameterError("max_epochs must be >= 1");
    if (c.patience < 0 || c.max_steps < 0) throw ParameterError("patience and max_steps must be non-negative");
}

double lr_schedule(int epoch, const TrainConfig& c) {
    if (epoch < c.warm_epochs) return c.lr0;
    return c.lr0 * std::pow(c.decay, epoch - c.warm_epochs + 1);
}

OptimizerState OptimizerState::for_params(const ModelParams& params) {
    OptimizerState s;
    s.m = params.zeros_like();
    s.v = params.zeros_like();
    return s;
}

void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& s, double lr) {
    ++s.step;
    const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.step));
    const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.step));
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = s.m.tensors();
    auto v = s.v.tensors();
    if (g.size() != p.size() || m.size() != p.size()) throw ParameterError("optimizer state does not match parameters");
    for (std::size_t t = 0; t < p.size(); ++t) {
        Matrix& w = *p[t].second;
        const Matrix& gt = *g[t].second;
        Matrix& mt = *m[t].second;
        Matrix& vt = *v[t].second;
        if (gt.rows() != w.rows() || gt.cols() != w.cols()) throw ParameterError("gradient shape mismatch in " + p[t].first);
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            const double gi = gt.data()[i];
            mt.data()[i] = s.beta1 * mt.data()[i] + (1.0 - s.beta1) * gi;
            vt.data()[i] = s.beta2 * vt.data()[i] + (1.0 - s.beta2) * gi * gi;
            const double mhat = mt.data()[i] / c1;
            const double vhat = vt.data()[i] / c2;
            w.data()[i] -= lr * mhat / (std::sqrt(vhat) + s.epsilon);
        }
    }
}

std::string metrics_to_csv(const std::vector<EpochMetrics>& rows, bool with_time) {
    std::string out = with_time ? "epoch,lr,train_loss,test_loss,val_loss,seconds\n" : "epoch,lr,train_loss,test_loss,val_loss\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g", r.epoch, r.lr, r.train_loss, r.test_loss,
                      r.val_loss);
        out += buf;
        if (with_time) {
            std::snprintf(buf, sizeof buf, ",%.3f", r.seconds);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

double split_loss(const ModelParams& params, const Hyper& hyper, const PreparedSplit& split, int threads) {
    if (split.labels.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::vector<Example> ex = split.examples();
    return loss(params, hyper, ex, ForwardMode::eval(), threads).nll;
}

namespace {

std::string describe_batch(const PreparedSplit& split, const std::vector<std::size_t>& idx, int epoch, long step) {
    std::ostringstream os;
    os << "epoch " << epoch << " step " << step << " batch [";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const std::size_t e = idx[i];
        if (i) os << ", ";
        os << "topology " << split.record_ids[split.owner[e]] << " year " << split.years[e];
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (double y : split.labels[e]) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        if (!split.labels[e].empty()) os << " labels [" << lo << ", " << hi << "]";
    }
    os << "]";
    return os.str();
}

}  // namespace

TrainResult train(const TrainConfig& config, const PreparedSplit& train_split, const PreparedSplit& test_split,
                  const PreparedSplit& val_split, const NormStats& stats, const EpochCallback& on_epoch) {
    validate(config);
    if (train_split.labels.empty()) throw ParameterError("training split is empty");
    const Hyper& hyper = config.hyper;
    ModelParams params = init_params(hyper, derive_seed(config.seed, {0}));
    OptimizerState opt = OptimizerState::for_params(params);
    ModelParams grads;

    const std::vector<Example> all = train_split.examples();
    std::vector<std::size_t> order(all.size());
    const bool has_val = !val_split.labels.empty();

    TrainResult result;
    result.best = {hyper, stats, params};
    double best = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_schedule(epoch, config);
        std::iota(order.begin(), order.end(), std::size_t{0});
        Rng shuffle(derive_seed(config.seed, {1, static_cast<std::uint64_t>(epoch)}));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.index(i)]);

        double loss_sum = 0.0;
        long batches = 0;
        bool out_of_steps = false;
        std::vector<Example> batch;
        std::vector<std::size_t> idx;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            if (config.max_steps > 0 && result.steps >= config.max_steps) {
                out_of_steps = true;
                break;
            }
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            batch.clear();
            idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(end));
            for (std::size_t e : idx) batch.push_back(all[e]);
            const ForwardMode mode =
                ForwardMode::training(derive_seed(config.seed, {2, static_cast<std::uint64_t>(result.steps)}));
            LossParts parts;
            try {
                parts = value_and_gradients(params, hyper, batch, grads, mode, config.threads);
            } catch (const NumericalError& e) {
                throw NumericalError(std::string(e.what()) + " at " + describe_batch(train_split, idx, epoch, result.steps));
            }
            if (!std::isfinite(parts.total())) {
                std::ostringstream os;
                os << "non-finite loss (nll " << parts.nll << ", l2 " << parts.regularization << ") at "
                   << describe_batch(train_split, idx, epoch, result.steps);
                throw NumericalError(os.str());
            }
            adam_step(params, grads, opt, lr);
            loss_sum += parts.total();
            ++batches;
            ++result.steps;
        }

        EpochMetrics m;
        m.epoch = epoch;
        m.lr = lr;
        m.train_loss = batches ? loss_sum / static_cast<double>(batches) : std::numeric_limits<double>::quiet_NaN();
        m.test_loss = split_loss(params, hyper, test_split, config.threads);
        m.val_loss = split_loss(params, hyper, val_split, config.threads);
        m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (batches > 0) {
            result.metrics.push_back(m);
            if (on_epoch) on_epoch(m);
            const double score = has_val ? m.val_loss : m.train_loss;
            if (score < best) {
                best = score;
                since_best = 0;
                result.best.params = params;
                result.best_epoch = epoch;
            } else if (config.patience > 0 && ++since_best >= config.patience) {
                break;
            }
        }
        if (out_of_steps) break;
    }
    return result;
}

TrainResult train(const TrainConfig& config, const Dataset& dataset, const EpochCallback& on_epoch) {
    const PreparedSplit tr = prepare_split(dataset, Split::Train, dataset.stats);
    const PreparedSplit te = prepare_split(dataset, Split::Test, dataset.stats);
    const PreparedSplit va = prepare_split(dataset, Split::Validation, dataset.stats);
    return train(config, tr, te, va, dataset.stats, on_epoch);
}

}  // namespace risknet

#include "risknet/model.hpp"

#include <cmath>
#include <map>

#include "risknet/error.hpp"
#include "risknet/parallel.hpp"
#include "risknet/rng.hpp"
#include "risknet/student_t.hpp"

namespace risknet {

namespace {

constexpr double kSeluLambda = 1.0507009873554804934193349852946;
constexpr double kSeluAlpha = 1.6732632423543772848170429916717;

const char* const kMessageNames[4] = {"message_working_s2c", "message_backup_s2c", "message_working_c2s",
                                      "message_backup_c2s"};

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double selu(double x) { return x > 0.0 ? kSeluLambda * x : kSeluLambda * kSeluAlpha * std::expm1(x); }

double selu_grad(double x) { return x > 0.0 ? kSeluLambda : kSeluLambda * kSeluAlpha * std::exp(x); }

Matrix zeros(Eigen::Index r, Eigen::Index c) { return Matrix::Zero(r, c); }

void fill_glorot(Matrix& m, Eigen::Index fan_in, Eigen::Index fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
}

}  // namespace

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

void validate(const Hyper& h) {
    if (h.hidden_dim < kComponentFeatures || h.hidden_dim < kSlaFeatures)
        throw ParameterError("hidden_dim must hold the zero-padded input features");
    if (h.msg_dim < 1) throw ParameterError("msg_dim must be positive");
    if (h.iterations < 1) throw ParameterError("message passing needs T >= 1");
    if (h.readout_sizes.empty()) throw ParameterError("readout needs at least one hidden layer");
    for (int s : h.readout_sizes)
        if (s < 1) throw ParameterError("readout layer sizes must be positive");
    if (h.dropout_rates.size() > h.readout_sizes.size()) throw ParameterError("more dropout rates than hidden layers");
    for (double r : h.dropout_rates)
        if (!(r >= 0.0 && r < 1.0)) throw ParameterError("dropout rates must lie in [0, 1)");
    if (!(h.l2_coeff >= 0.0)) throw ParameterError("l2 coefficient must be non-negative");
    if (!(h.nu > 0.0)) throw ParameterError("degrees of freedom must be positive");
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z = *this;
    for (auto& [name, t] : z.tensors()) t->setZero();
    return z;
}

std::vector<std::pair<std::string, Matrix*>> ModelParams::tensors() {
    std::vector<std::pair<std::string, Matrix*>> out;
    for (int m = 0; m < 4; ++m) {
        out.emplace_back(std::string(kMessageNames[m]) + "/weight", &messages[static_cast<std::size_t>(m)].weight);
        out.emplace_back(std::string(kMessageNames[m]) + "/bias", &messages[static_cast<std::size_t>(m)].bias);
    }
    for (auto [name, cell] : {std::pair{"update_component", &component_update}, std::pair{"update_sla", &sla_update}}) {
        out.emplace_back(std::string(name) + "/kernel", &cell->kernel);
        out.emplace_back(std::string(name) + "/recurrent", &cell->recurrent);
        out.emplace_back(std::string(name) + "/bias", &cell->bias);
    }
    for (std::size_t i = 0; i < readout.size(); ++i) {
        out.emplace_back("readout_" + std::to_string(i) + "/weight", &readout[i].weight);
        out.emplace_back("readout_" + std::to_string(i) + "/bias", &readout[i].bias);
    }
    return out;
}

std::vector<std::pair<std::string, const Matrix*>> ModelParams::tensors() const {
    auto mutable_view = const_cast<ModelParams*>(this)->tensors();
    return {mutable_view.begin(), mutable_view.end()};
}

ModelParams init_params(const Hyper& hyper, std::uint64_t seed) {
    validate(hyper);
    const Eigen::Index H = hyper.hidden_dim, M = hyper.msg_dim;
    Rng rng(seed);
    ModelParams p;
    for (Affine& a : p.messages) {
        a.weight.resize(2 * H, M);
        fill_glorot(a.weight, 2 * H, M, rng);
        a.bias = zeros(1, M);
    }
    for (GruCell* cell : {&p.component_update, &p.sla_update}) {
        cell->kernel.resize(M, 3 * H);
        fill_glorot(cell->kernel, M, 3 * H, rng);
        cell->recurrent.resize(H, 3 * H);
        fill_glorot(cell->recurrent, H, 3 * H, rng);
        cell->bias = zeros(1, 3 * H);
    }
    Eigen::Index in = H;
    std::vector<int> widths = hyper.readout_sizes;
    widths.push_back(2);
    for (int w : widths) {
        Affine a;
        a.weight.resize(in, w);
        fill_glorot(a.weight, in, w, rng);
        a.bias = zeros(1, w);
        p.readout.push_back(std::move(a));
        in = w;
    }
    return p;
}

ModelInput ModelInput::build(const MetaGraph& graph, const FeatureSet& normalized) {
    if (normalized.component_features.rows() != graph.n_components ||
        normalized.sla_features.rows() != graph.n_slas)
        throw ParameterError("feature rows do not match the metagraph");
    ModelInput in;
    in.n_components = graph.n_components;
    in.n_slas = graph.n_slas;
    in.component_features = normalized.component_features;
    in.sla_features = normalized.sla_features;
    in.sla_working.assign(static_cast<std::size_t>(graph.n_slas), {});
    in.sla_backup.assign(static_cast<std::size_t>(graph.n_slas), {});
    in.comp_working.assign(static_cast<std::size_t>(graph.n_components), {});
    in.comp_backup.assign(static_cast<std::size_t>(graph.n_components), {});
    auto add = [&](const std::vector<std::pair<int, int>>& edges, auto& by_sla, auto& by_comp) {
        for (auto [s, c] : edges) {
            if (s < 0 || s >= graph.n_slas || c < 0 || c >= graph.n_components)
                throw ParameterError("metagraph edge out of range");
            by_sla[static_cast<std::size_t>(s)].push_back(c);
            by_comp[static_cast<std::size_t>(c)].push_back(s);
        }
    };
    add(graph.edges_working, in.sla_working, in.comp_working);
    add(graph.edges_backup, in.sla_backup, in.comp_backup);
    return in;
}

ModelInput merge_inputs(std::span<const ModelInput* const> parts) {
    ModelInput out;
    for (const ModelInput* p : parts) {
        out.n_components += p->n_components;
        out.n_slas += p->n_slas;
    }
    const Eigen::Index cw = parts.empty() ? kComponentFeatures : parts.front()->component_features.cols();
    const Eigen::Index sw = parts.empty() ? kSlaFeatures : parts.front()->sla_features.cols();
    out.component_features.resize(out.n_components, cw);
    out.sla_features.resize(out.n_slas, sw);
    int c0 = 0, s0 = 0;
    for (const ModelInput* p : parts) {
        out.component_features.middleRows(c0, p->n_components) = p->component_features;
        out.sla_features.middleRows(s0, p->n_slas) = p->sla_features;
        auto shifted = [](const std::vector<std::vector<int>>& lists, int offset, auto& dst) {
            for (const auto& l : lists) {
                std::vector<int> v(l);
                for (int& x : v) x += offset;
                dst.push_back(std::move(v));
            }
        };
        shifted(p->sla_working, c0, out.sla_working);
        shifted(p->sla_backup, c0, out.sla_backup);
        shifted(p->comp_working, s0, out.comp_working);
        shifted(p->comp_backup, s0, out.comp_backup);
        c0 += p->n_components;
        s0 += p->n_slas;
    }
    return out;
}

namespace {

struct GruCache {
    Matrix x, h, z, r, c;
};

Matrix gru_forward(const GruCell& cell, const Matrix& x, const Matrix& h, GruCache* cache) {
    const Eigen::Index H = h.cols();
    Matrix gx = x * cell.kernel;
    gx.rowwise() += cell.bias.row(0);
    const Matrix gh = h * cell.recurrent.leftCols(2 * H);
    const Matrix z = (gx.leftCols(H) + gh.leftCols(H)).unaryExpr(&sigmoid);
    const Matrix r = (gx.middleCols(H, H) + gh.rightCols(H)).unaryExpr(&sigmoid);
    const Matrix rh = r.cwiseProduct(h);
    Matrix c = gx.rightCols(H) + rh * cell.recurrent.rightCols(H);
    c = c.array().tanh().matrix();
    Matrix out = z.cwiseProduct(h) + (1.0 - z.array()).matrix().cwiseProduct(c);
    if (cache) *cache = {x, h, z, r, std::move(c)};
    return out;
}

// Accumulates parameter gradients into g; returns input and state gradients.
void gru_backward(const GruCell& cell, const GruCache& k, const Matrix& dh_out, GruCell& g, Matrix& dx,
                  Matrix& dh) {
    const Eigen::Index H = k.h.cols();
    const Eigen::Index n = k.h.rows();
    const auto z = k.z.array(), r = k.r.array(), c = k.c.array(), h = k.h.array();
    const auto dout = dh_out.array();

    Matrix dgates(n, 3 * H);
    dgates.leftCols(H) = (dout * (h - c) * z * (1.0 - z)).matrix();
    dgates.rightCols(H) = (dout * (1.0 - z) * (1.0 - c * c)).matrix();
    const Matrix d_rh = dgates.rightCols(H) * cell.recurrent.rightCols(H).transpose();
    dgates.middleCols(H, H) = (d_rh.array() * h * r * (1.0 - r)).matrix();
    dh = (dout * z).matrix() + d_rh.cwiseProduct(k.r);

    g.kernel.noalias() += k.x.transpose() * dgates;
    g.bias += dgates.colwise().sum();
    dx = dgates * cell.kernel.transpose();
    const Matrix rh = k.r.cwiseProduct(k.h);
    g.recurrent.leftCols(2 * H).noalias() += k.h.transpose() * dgates.leftCols(2 * H);
    g.recurrent.rightCols(H).noalias() += rh.transpose() * dgates.rightCols(H);
    dh.noalias() += dgates.leftCols(2 * H) * cell.recurrent.leftCols(2 * H).transpose();
}

Matrix aggregate(const std::vector<std::vector<int>>& lists, const Matrix& source) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(lists.size()), source.cols());
    for (std::size_t i = 0; i < lists.size(); ++i)
        for (int j : lists[i]) out.row(static_cast<Eigen::Index>(i)) += source.row(j);
    return out;
}

// Transpose of aggregate: sends each row's gradient to every listed source row.
void scatter_add(const std::vector<std::vector<int>>& lists, const Matrix& grad, Matrix& source_grad) {
    for (std::size_t i = 0; i < lists.size(); ++i)
        for (int j : lists[i]) source_grad.row(j) += grad.row(static_cast<Eigen::Index>(i));
}

Eigen::VectorXd degrees(const std::vector<std::vector<int>>& lists) {
    Eigen::VectorXd d(static_cast<Eigen::Index>(lists.size()));
    for (std::size_t i = 0; i < lists.size(); ++i) d(static_cast<Eigen::Index>(i)) = static_cast<double>(lists[i].size());
    return d;
}

// Sum over incident edges of affine(h_sender, h_receiver); the sender halves
// are aggregated first, the receiver half is weighted by the degree.
Matrix summed_message(const Affine& map, const Matrix& aggregated_senders, const Matrix& receivers,
                      const Eigen::VectorXd& degree) {
    const Eigen::Index H = receivers.cols();
    Matrix self = receivers * map.weight.bottomRows(H);
    self.rowwise() += map.bias.row(0);
    Matrix m = aggregated_senders * map.weight.topRows(H);
    m.array() += self.array().colwise() * degree.array();
    return m;
}

void summed_message_backward(const Affine& map, const Matrix& aggregated_senders, const Matrix& receivers,
                             const Eigen::VectorXd& degree, const Matrix& dm, Affine& g, Matrix& d_aggregated,
                             Matrix& d_receivers) {
    const Eigen::Index H = receivers.cols();
    g.weight.topRows(H).noalias() += aggregated_senders.transpose() * dm;
    d_aggregated = dm * map.weight.topRows(H).transpose();
    const Matrix scaled = (dm.array().colwise() * degree.array()).matrix();
    g.weight.bottomRows(H).noalias() += receivers.transpose() * scaled;
    g.bias += scaled.colwise().sum();
    d_receivers.noalias() += scaled * map.weight.bottomRows(H).transpose();
}

struct RoundCache {
    Matrix hc, hs;
    Matrix agg_cw, agg_cb, agg_sw, agg_sb;
    GruCache gru_c, gru_s;
};

struct Degrees {
    Eigen::VectorXd cw, cb, sw, sb;
    explicit Degrees(const ModelInput& in)
        : cw(degrees(in.comp_working)), cb(degrees(in.comp_backup)), sw(degrees(in.sla_working)),
          sb(degrees(in.sla_backup)) {}
};

Matrix padded(const Matrix& features, int hidden) {
    Matrix h = Matrix::Zero(features.rows(), hidden);
    h.leftCols(features.cols()) = features;
    return h;
}

void check_input(const Hyper& hyper, const ModelInput& in) {
    if (in.component_features.rows() != in.n_components || in.sla_features.rows() != in.n_slas)
        throw ParameterError("input feature rows do not match node counts");
    if (in.component_features.cols() > hyper.hidden_dim || in.sla_features.cols() > hyper.hidden_dim)
        throw ParameterError("input features wider than the hidden state");
}

Matrix message_passing(const ModelParams& p, const Hyper& hyper, const ModelInput& in,
                       std::vector<RoundCache>* caches) {
    check_input(hyper, in);
    const Degrees deg(in);
    Matrix hc = padded(in.component_features, hyper.hidden_dim);
    Matrix hs = padded(in.sla_features, hyper.hidden_dim);
    if (caches) caches->resize(static_cast<std::size_t>(hyper.iterations));
    for (int t = 0; t < hyper.iterations; ++t) {
        RoundCache local;
        RoundCache& rc = caches ? (*caches)[static_cast<std::size_t>(t)] : local;
        rc.agg_cw = aggregate(in.comp_working, hs);
        rc.agg_cb = aggregate(in.comp_backup, hs);
        rc.agg_sw = aggregate(in.sla_working, hc);
        rc.agg_sb = aggregate(in.sla_backup, hc);
        const Matrix mc = summed_message(p.messages[kWorkingToComponent], rc.agg_cw, hc, deg.cw) +
                          summed_message(p.messages[kBackupToComponent], rc.agg_cb, hc, deg.cb);
        const Matrix ms = summed_message(p.messages[kWorkingToSla], rc.agg_sw, hs, deg.sw) +
                          summed_message(p.messages[kBackupToSla], rc.agg_sb, hs, deg.sb);
        Matrix hc_next = gru_forward(p.component_update, mc, hc, caches ? &rc.gru_c : nullptr);
        Matrix hs_next = gru_forward(p.sla_update, ms, hs, caches ? &rc.gru_s : nullptr);
        if (caches) {
            rc.hc = std::move(hc);
            rc.hs = std::move(hs);
        }
        hc = std::move(hc_next);
        hs = std::move(hs_next);
    }
    return hs;
}

void message_passing_backward(const ModelParams& p, const Hyper& hyper, const ModelInput& in,
                              const std::vector<RoundCache>& caches, Matrix dhs, ModelParams& g) {
    const Degrees deg(in);
    Matrix dhc = Matrix::Zero(in.n_components, hyper.hidden_dim);
    Matrix dmc, dms, dhc_prev, dhs_prev, d_agg;
    for (int t = hyper.iterations - 1; t >= 0; --t) {
        const RoundCache& rc = caches[static_cast<std::size_t>(t)];
        gru_backward(p.component_update, rc.gru_c, dhc, g.component_update, dmc, dhc_prev);
        gru_backward(p.sla_update, rc.gru_s, dhs, g.sla_update, dms, dhs_prev);

        summed_message_backward(p.messages[kWorkingToComponent], rc.agg_cw, rc.hc, deg.cw, dmc,
                                g.messages[kWorkingToComponent], d_agg, dhc_prev);
        scatter_add(in.comp_working, d_agg, dhs_prev);
        summed_message_backward(p.messages[kBackupToComponent], rc.agg_cb, rc.hc, deg.cb, dmc,
                                g.messages[kBackupToComponent], d_agg, dhc_prev);
        scatter_add(in.comp_backup, d_agg, dhs_prev);
        summed_message_backward(p.messages[kWorkingToSla], rc.agg_sw, rc.hs, deg.sw, dms,
                                g.messages[kWorkingToSla], d_agg, dhs_prev);
        scatter_add(in.sla_working, d_agg, dhc_prev);
        summed_message_backward(p.messages[kBackupToSla], rc.agg_sb, rc.hs, deg.sb, dms,
                                g.messages[kBackupToSla], d_agg, dhs_prev);
        scatter_add(in.sla_backup, d_agg, dhc_prev);

        dhc = std::move(dhc_prev);
        dhs = std::move(dhs_prev);
    }
}

struct ReadoutCache {
    std::vector<Matrix> inputs;  // input of every layer
    std::vector<Matrix> pre;     // hidden pre-activations
    std::vector<Matrix> masks;   // empty when the layer is not dropped
};

std::vector<Matrix> dropout_masks(const Hyper& hyper, Eigen::Index rows, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Matrix> masks;
    for (std::size_t i = 0; i < hyper.dropout_rates.size(); ++i) {
        const double rate = hyper.dropout_rates[i];
        if (rate <= 0.0) {
            masks.emplace_back();
            continue;
        }
        Matrix m(rows, hyper.readout_sizes[i]);
        const double keep = 1.0 / (1.0 - rate);
        for (Eigen::Index j = 0; j < m.size(); ++j) m.data()[j] = rng.uniform01() < rate ? 0.0 : keep;
        masks.push_back(std::move(m));
    }
    return masks;
}

// Returns the raw n x 2 output (location, pre-softplus scale).
Matrix readout_forward(const ModelParams& p, const Matrix& hs, const std::vector<Matrix>& masks,
                       ReadoutCache* cache) {
    Matrix a = hs;
    const std::size_t hidden = p.readout.size() - 1;
    for (std::size_t i = 0; i < p.readout.size(); ++i) {
        Matrix pre = a * p.readout[i].weight;
        pre.rowwise() += p.readout[i].bias.row(0);
        if (cache) cache->inputs.push_back(a);
        if (i == hidden) return pre;
        a = pre.unaryExpr(&selu);
        if (i < masks.size() && masks[i].size() > 0) a = a.cwiseProduct(masks[i]);
        if (cache) cache->pre.push_back(std::move(pre));
    }
    return a;
}

Matrix readout_backward(const ModelParams& p, const ReadoutCache& cache, const std::vector<Matrix>& masks,
                        Matrix dout, ModelParams& g) {
    for (std::size_t i = p.readout.size(); i-- > 0;) {
        g.readout[i].weight.noalias() += cache.inputs[i].transpose() * dout;
        g.readout[i].bias += dout.colwise().sum();
        Matrix da = dout * p.readout[i].weight.transpose();
        if (i == 0) return da;
        const std::size_t h = i - 1;  // hidden layer producing this input
        if (h < masks.size() && masks[h].size() > 0) da = da.cwiseProduct(masks[h]);
        dout = da.cwiseProduct(cache.pre[h].unaryExpr(&selu_grad));
    }
    return dout;
}

PredictedDistribution to_distribution(const Matrix& raw, double nu) {
    PredictedDistribution d;
    d.nu = nu;
    d.location.resize(static_cast<std::size_t>(raw.rows()));
    d.scale.resize(static_cast<std::size_t>(raw.rows()));
    for (Eigen::Index k = 0; k < raw.rows(); ++k) {
        d.location[static_cast<std::size_t>(k)] = raw(k, 0);
        d.scale[static_cast<std::size_t>(k)] = softplus(raw(k, 1)) + kScaleFloor;
    }
    return d;
}

std::vector<Matrix> masks_for(const Hyper& hyper, const ForwardMode& mode, Eigen::Index rows, std::uint64_t stream) {
    if (!mode.train) return {};
    return dropout_masks(hyper, rows, derive_seed(mode.dropout_seed, {stream}));
}

double regularization(const ModelParams& p, const Hyper& hyper) {
    double s = 0.0;
    for (const Affine& a : p.messages) s += a.weight.squaredNorm();
    return hyper.l2_coeff * s;
}

struct Group {
    const ModelInput* input;
    std::vector<std::size_t> examples;
};

std::vector<Group> group_by_input(std::span<const Example> batch) {
    std::vector<Group> groups;
    std::map<const ModelInput*, std::size_t> slot;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!batch[i].input) throw ParameterError("example without input");
        if (static_cast<int>(batch[i].labels.size()) != batch[i].input->n_slas)
            throw ParameterError("label count does not match SLA count");
        auto [it, fresh] = slot.emplace(batch[i].input, groups.size());
        if (fresh) groups.push_back({batch[i].input, {}});
        groups[it->second].examples.push_back(i);
    }
    return groups;
}

std::size_t effective_batch(std::span<const Example> batch) {
    std::size_t n = 0;
    for (const Example& e : batch) n += e.input && e.input->n_slas > 0;
    return n;
}

// Sum over one group's examples of (1/n_slas) * NLL, optionally with gradients
// scaled by `weight`.
double group_pass(const ModelParams& p, const Hyper& hyper, const Group& group, std::span<const Example> batch,
                  const ForwardMode& mode, ModelParams* g, double weight) {
    const ModelInput& in = *group.input;
    if (in.n_slas == 0) return 0.0;
    std::vector<RoundCache> caches;
    const Matrix hs = message_passing(p, hyper, in, g ? &caches : nullptr);
    Matrix dhs = g ? Matrix::Zero(hs.rows(), hs.cols()) : Matrix();
    double sum = 0.0;
    const double nu = hyper.nu;
    for (std::size_t idx : group.examples) {
        const Example& ex = batch[idx];
        const std::vector<Matrix> masks = masks_for(hyper, mode, hs.rows(), idx);
        ReadoutCache rc;
        const Matrix raw = readout_forward(p, hs, masks, g ? &rc : nullptr);
        const double per_sla = 1.0 / static_cast<double>(in.n_slas);
        double nll = 0.0;
        Matrix dout = g ? Matrix(in.n_slas, 2) : Matrix();
        for (int k = 0; k < in.n_slas; ++k) {
            const double mu = raw(k, 0);
            const double sigma = softplus(raw(k, 1)) + kScaleFloor;
            const double y = ex.labels[static_cast<std::size_t>(k)];
            nll -= student_t_logpdf(y, mu, sigma, nu);
            if (g) {
                const double z = (y - mu) / sigma;
                const double denom = sigma * (nu + z * z);
                const double d_mu = -(nu + 1.0) * z / denom;
                const double d_sigma = 1.0 / sigma - (nu + 1.0) * z * z / denom;
                dout(k, 0) = weight * per_sla * d_mu;
                dout(k, 1) = weight * per_sla * d_sigma * sigmoid(raw(k, 1));
            }
        }
        sum += nll * per_sla;
        if (g) dhs += readout_backward(p, rc, masks, std::move(dout), *g);
    }
    if (g) message_passing_backward(p, hyper, in, caches, std::move(dhs), *g);
    return sum;
}

LossParts run_batch(const ModelParams& p, const Hyper& hyper, std::span<const Example> batch,
                    const ForwardMode& mode, int threads, ModelParams* grads) {
    validate(hyper);
    const std::vector<Group> groups = group_by_input(batch);
    const std::size_t n_eff = effective_batch(batch);
    LossParts parts;
    parts.regularization = regularization(p, hyper);
    if (grads) *grads = p.zeros_like();
    if (n_eff > 0) {
        const double weight = 1.0 / static_cast<double>(n_eff);
        std::vector<double> sums(groups.size(), 0.0);
        std::vector<ModelParams> local(grads ? groups.size() : 0);
        parallel_for(groups.size(), threads, [&](std::size_t i) {
            ModelParams* gi = nullptr;
            if (grads) {
                local[i] = p.zeros_like();
                gi = &local[i];
            }
            sums[i] = group_pass(p, hyper, groups[i], batch, mode, gi, weight);
        });
        double total = 0.0;
        for (std::size_t i = 0; i < groups.size(); ++i) {
            total += sums[i];
            if (grads) {
                auto dst = grads->tensors();
                auto src = local[i].tensors();
                for (std::size_t t = 0; t < dst.size(); ++t) *dst[t].second += *src[t].second;
            }
        }
        parts.nll = total * weight;
    }
    if (grads) {
        for (std::size_t m = 0; m < 4; ++m)
            grads->messages[m].weight += 2.0 * hyper.l2_coeff * p.messages[m].weight;
        for (const auto& [name, t] : grads->tensors())
            if (!t->allFinite()) throw NumericalError("non-finite gradient in block " + name);
    }
    return parts;
}

}  // namespace

Matrix sla_states(const ModelParams& params, const Hyper& hyper, const ModelInput& input) {
    validate(hyper);
    return message_passing(params, hyper, input, nullptr);
}

PredictedDistribution forward(const ModelParams& params, const Hyper& hyper, const ModelInput& input,
                              ForwardMode mode) {
    validate(hyper);
    const Matrix hs = message_passing(params, hyper, input, nullptr);
    return to_distribution(readout_forward(params, hs, masks_for(hyper, mode, hs.rows(), 0), nullptr), hyper.nu);
}

LossParts loss(const ModelParams& params, const Hyper& hyper, std::span<const Example> batch, ForwardMode mode,
               int threads) {
    return run_batch(params, hyper, batch, mode, threads, nullptr);
}

LossParts value_and_gradients(const ModelParams& params, const Hyper& hyper, std::span<const Example> batch,
                              ModelParams& grads, ForwardMode mode, int threads) {
    return run_batch(params, hyper, batch, mode, threads, &grads);
}

PredictedDistribution predict_mc_dropout(const ModelParams& params, const Hyper& hyper, const ModelInput& input,
                                         int n_passes, std::uint64_t seed) {
    if (n_passes < 1) throw ParameterError("n_passes must be >= 1");
    validate(hyper);
    const Matrix hs = message_passing(params, hyper, input, nullptr);
    PredictedDistribution avg;
    avg.nu = hyper.nu;
    avg.location.assign(static_cast<std::size_t>(input.n_slas), 0.0);
    avg.scale.assign(static_cast<std::size_t>(input.n_slas), 0.0);
    for (int pass = 0; pass < n_passes; ++pass) {
        const ForwardMode mode = ForwardMode::training(derive_seed(seed, {static_cast<std::uint64_t>(pass)}));
        const PredictedDistribution d =
            to_distribution(readout_forward(params, hs, masks_for(hyper, mode, hs.rows(), 0), nullptr), hyper.nu);
        for (std::size_t k = 0; k < d.location.size(); ++k) {
            avg.location[k] += d.location[k];
            avg.scale[k] += d.scale[k];
        }
    }
    for (std::size_t k = 0; k < avg.location.size(); ++k) {
        avg.location[k] /= n_passes;
        avg.scale[k] /= n_passes;
    }
    return avg;
}

}  // namespace risknet

#include "tpad/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tpad/dataset.hpp"
#include "tpad/errors.hpp"
#include "tpad/linalg.hpp"
#include "tpad/rng.hpp"

namespace tpad {

// ---------------------------------------------------------------------------
// Architecture
// ---------------------------------------------------------------------------

AeArchitecture AeArchitecture::standard(std::vector<int> sizes) {
    AeArchitecture arch;
    arch.layer_sizes = std::move(sizes);
    const size_t transitions = arch.layer_sizes.size() - 1;
    arch.activations.assign(transitions, Activation::tanh);
    arch.activations[arch.bottleneck_transition()] = Activation::identity;
    arch.activations[transitions - 1] = Activation::identity;
    arch.validate();
    return arch;
}

AeArchitecture AeArchitecture::linear(std::vector<int> sizes) {
    AeArchitecture arch;
    arch.layer_sizes = std::move(sizes);
    arch.activations.assign(arch.layer_sizes.size() - 1, Activation::identity);
    arch.validate();
    return arch;
}

AeArchitecture AeArchitecture::for_dims(Index m, int p) {
    int h = std::max(16, 4 * p);
    return standard({static_cast<int>(m), h, h, p, h, h, static_cast<int>(m)});
}

int AeArchitecture::bottleneck() const {
    return layer_sizes[layer_sizes.size() / 2];
}

Index AeArchitecture::num_parameters() const {
    Index count = 0;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
        count += static_cast<Index>(layer_sizes[l + 1]) * layer_sizes[l] + layer_sizes[l + 1];
    }
    return count;
}

void AeArchitecture::validate() const {
    const size_t S = layer_sizes.size();
    if (S < 3 || S % 2 == 0) {
        throw ParamError("AeArchitecture: layer_sizes must have odd length >= 3");
    }
    for (int s : layer_sizes) {
        if (s < 1) throw ParamError("AeArchitecture: layer sizes must be >= 1");
    }
    if (layer_sizes.front() != layer_sizes.back()) {
        throw ParamError("AeArchitecture: input and output sizes differ");
    }
    const size_t c = S / 2;
    for (size_t i = 0; i < S; ++i) {
        if (layer_sizes[i] != layer_sizes[S - 1 - i]) {
            throw ParamError("AeArchitecture: layer_sizes must be symmetric around the bottleneck");
        }
    }
    // bottleneck is the unique minimum among interior layers
    for (size_t i = 1; i + 1 < S; ++i) {
        if (i == c) continue;
        if (layer_sizes[i] <= layer_sizes[c]) {
            throw ParamError("AeArchitecture: bottleneck must be the unique interior minimum");
        }
    }
    if (activations.size() != S - 1) {
        throw ParamError("AeArchitecture: need one activation per transition");
    }
    if (activations[bottleneck_transition()] != Activation::identity ||
        activations[S - 2] != Activation::identity) {
        throw ParamError("AeArchitecture: bottleneck and output transitions must be identity");
    }
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ParamError("TrainConfig: learning_rate must be > 0");
    if (batch_size < 1) throw ParamError("TrainConfig: batch_size must be >= 1");
    if (max_epochs < 1) throw ParamError("TrainConfig: max_epochs must be >= 1");
    if (patience < 1) throw ParamError("TrainConfig: patience must be >= 1");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ParamError("TrainConfig: validation_fraction must be in (0, 1)");
    }
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

AeModel init_ae(const AeArchitecture& arch, std::uint64_t seed) {
    arch.validate();
    AeModel model;
    model.arch = arch;
    Rng rng(seed);
    for (size_t l = 0; l + 1 < arch.layer_sizes.size(); ++l) {
        const Index in = arch.layer_sizes[l];
        const Index out = arch.layer_sizes[l + 1];
        const double lim = std::sqrt(6.0 / static_cast<double>(in + out));
        Matrix w(out, in);
        for (Index r = 0; r < out; ++r) {
            for (Index c = 0; c < in; ++c) w(r, c) = rng.uniform(-lim, lim);
        }
        model.weights.push_back(std::move(w));
        model.biases.push_back(Vector::Zero(out));
    }
    return model;
}

ForwardResult forward(const AeModel& model, const ConstMatrixRef& x) {
    if (x.cols() != model.m()) {
        throw ShapeError("ae forward: x has " + std::to_string(x.cols()) +
                         " columns, model expects " + std::to_string(model.m()));
    }
    const size_t L = model.arch.num_transitions();
    ForwardResult res;
    res.cache.activations.reserve(L + 1);
    res.cache.preacts.reserve(L);
    res.cache.activations.push_back(x);
    for (size_t l = 0; l < L; ++l) {
        Matrix z = res.cache.activations.back() * model.weights[l].transpose();
        z.rowwise() += model.biases[l].transpose();
        res.cache.preacts.push_back(z);
        if (model.arch.activations[l] == Activation::tanh) {
            res.cache.activations.push_back(z.array().tanh().matrix());
        } else {
            res.cache.activations.push_back(std::move(z));
        }
    }
    res.y = res.cache.activations.back();
    res.z = res.cache.activations[model.arch.layer_sizes.size() / 2];
    return res;
}

Matrix reconstruct(const AeModel& model, const ConstMatrixRef& x) {
    return forward(model, x).y;
}

Matrix encode(const AeModel& model, const ConstMatrixRef& x) {
    if (x.cols() != model.m()) {
        throw ShapeError("ae encode: x has " + std::to_string(x.cols()) +
                         " columns, model expects " + std::to_string(model.m()));
    }
    const size_t half = model.arch.layer_sizes.size() / 2;
    Matrix a = x;
    for (size_t l = 0; l < half; ++l) {
        Matrix z = a * model.weights[l].transpose();
        z.rowwise() += model.biases[l].transpose();
        a = model.arch.activations[l] == Activation::tanh ? z.array().tanh().matrix() : std::move(z);
    }
    return a;
}

Gradients backward(const AeModel& model, const ConstMatrixRef& x, const ForwardCache& cache) {
    const size_t L = model.arch.num_transitions();
    if (cache.activations.size() != L + 1 || cache.preacts.size() != L ||
        cache.activations[0].rows() != x.rows() || cache.activations[0].cols() != x.cols() ||
        !(cache.activations[0].array() == x.array()).all()) {
        throw ContractError("ae backward: cache does not match this model/input");
    }

    const double norm = static_cast<double>(x.rows()) * static_cast<double>(x.cols());
    Gradients grads;
    grads.weights.resize(L);
    grads.biases.resize(L);

    // dL/dA_L for L = sum |x - y|^2 / (n*m)
    Matrix g = 2.0 * (cache.activations[L] - x) / norm;
    for (size_t l = L; l-- > 0;) {
        Matrix d;
        if (model.arch.activations[l] == Activation::tanh) {
            d = g.array() * (1.0 - cache.activations[l + 1].array().square());
        } else {
            d = std::move(g);
        }
        grads.weights[l] = d.transpose() * cache.activations[l];
        grads.biases[l] = d.colwise().sum();
        if (l > 0) g = d * model.weights[l];
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct AdamState {
    std::vector<Matrix> mw, vw;
    std::vector<Vector> mb, vb;
    long t = 0;

    explicit AdamState(const AeModel& model) {
        for (size_t l = 0; l < model.weights.size(); ++l) {
            mw.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            vw.push_back(Matrix::Zero(model.weights[l].rows(), model.weights[l].cols()));
            mb.push_back(Vector::Zero(model.biases[l].size()));
            vb.push_back(Vector::Zero(model.biases[l].size()));
        }
    }

    void step(AeModel& model, const Gradients& grads, double lr) {
        constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
        ++t;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
        for (size_t l = 0; l < model.weights.size(); ++l) {
            mw[l] = beta1 * mw[l] + (1.0 - beta1) * grads.weights[l];
            vw[l] = (beta2 * vw[l]).array() + (1.0 - beta2) * grads.weights[l].array().square();
            model.weights[l].array() -=
                lr * (mw[l].array() / bc1) / ((vw[l].array() / bc2).sqrt() + eps);
            mb[l] = beta1 * mb[l] + (1.0 - beta1) * grads.biases[l];
            vb[l] = (beta2 * vb[l]).array() + (1.0 - beta2) * grads.biases[l].array().square();
            model.biases[l].array() -=
                lr * (mb[l].array() / bc1) / ((vb[l].array() / bc2).sqrt() + eps);
        }
    }
};

} // namespace

AeModel train(const ConstMatrixRef& train_x, const AeArchitecture& arch, const TrainConfig& cfg) {
    arch.validate();
    cfg.validate();
    if (train_x.cols() != arch.input_dim()) {
        throw ShapeError("ae train: data has " + std::to_string(train_x.cols()) +
                         " columns, architecture expects " + std::to_string(arch.input_dim()));
    }
    const Index n = train_x.rows();
    if (n < cfg.batch_size) {
        throw ParamError("ae train: n=" + std::to_string(n) + " smaller than batch_size=" +
                         std::to_string(cfg.batch_size));
    }

    Rng master(cfg.seed);

    // held-out validation split for early stopping
    auto perm = master.child(0x76616c).permutation(n);
    Index n_val = std::max<Index>(1, static_cast<Index>(
                                         std::llround(cfg.validation_fraction * static_cast<double>(n))));
    if (n_val >= n) n_val = n - 1;
    std::vector<Index> val_idx(perm.begin(), perm.begin() + n_val);
    std::vector<Index> fit_idx(perm.begin() + n_val, perm.end());
    Matrix x_val = take_rows(train_x, val_idx);
    Matrix x_fit = take_rows(train_x, fit_idx);

    AeModel model = init_ae(arch, master.child(0x696e6974).next_u64());
    AdamState adam(model);

    const Index n_fit = x_fit.rows();
    const Index batch = std::min<Index>(cfg.batch_size, n_fit);

    AeModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int best_epoch = -1;
    int since_best = 0;

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        // shuffle reseeded per epoch from the master seed
        auto order = master.child(0x65700000ull + static_cast<std::uint64_t>(epoch)).permutation(n_fit);
        for (Index start = 0; start < n_fit; start += batch) {
            const Index count = std::min(batch, n_fit - start);
            Matrix xb(count, train_x.cols());
            for (Index i = 0; i < count; ++i) {
                xb.row(i) = x_fit.row(order[static_cast<size_t>(start + i)]);
            }
            ForwardResult fwd = forward(model, xb);
            Gradients grads = backward(model, xb, fwd.cache);
            adam.step(model, grads, cfg.learning_rate);
        }

        const double train_mse = mse(reconstruct(model, x_fit), x_fit);
        const double val_mse = mse(reconstruct(model, x_val), x_val);
        model.train_log.train_mse.push_back(train_mse);
        model.train_log.val_mse.push_back(val_mse);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
            throw TrainingError("ae train: loss diverged at epoch " + std::to_string(epoch));
        }

        if (val_mse < best_val) {
            best_val = val_mse;
            best.weights = model.weights;
            best.biases = model.biases;
            best_epoch = epoch;
            since_best = 0;
        } else {
            ++since_best;
            if (since_best >= cfg.patience) break;
        }
    }

    best.arch = model.arch;
    best.train_log = model.train_log;
    best.train_log.best_epoch = best_epoch;
    return best;
}

// ---------------------------------------------------------------------------
// Gradient verification
// ---------------------------------------------------------------------------

GradCheckReport grad_check(const AeArchitecture& arch, double rel_tolerance, std::uint64_t seed,
                           double abs_floor, double fd_step) {
    arch.validate();
    if (arch.num_parameters() > 500) {
        throw ParamError("grad_check: architecture has " + std::to_string(arch.num_parameters()) +
                         " parameters, limit is 500");
    }
    Rng rng(seed);
    AeModel model = init_ae(arch, rng.child(1).next_u64());
    Rng data_rng = rng.child(2);
    Matrix x(3, arch.input_dim());
    for (Index i = 0; i < x.rows(); ++i) {
        for (Index j = 0; j < x.cols(); ++j) x(i, j) = data_rng.gaussian(0.0, 1.0);
    }

    ForwardResult fwd = forward(model, x);
    Gradients analytic = backward(model, x, fwd.cache);

    auto loss_at = [&](const AeModel& m) { return mse(reconstruct(m, x), x); };

    GradCheckReport report;
    report.pass = true;

    auto check_entry = [&](double* param, double analytic_g) {
        const double saved = *param;
        *param = saved + fd_step;
        const double up = loss_at(model);
        *param = saved - fd_step;
        const double down = loss_at(model);
        *param = saved;
        const double numeric_g = (up - down) / (2.0 * fd_step);
        const double diff = std::abs(analytic_g - numeric_g);
        ++report.params_checked;
        if (diff <= abs_floor) return;
        const double rel = diff / std::max(std::abs(analytic_g), std::abs(numeric_g));
        report.max_rel_dev = std::max(report.max_rel_dev, rel);
        if (rel > rel_tolerance) report.pass = false;
    };

    for (size_t l = 0; l < model.weights.size(); ++l) {
        for (Index r = 0; r < model.weights[l].rows(); ++r) {
            for (Index c = 0; c < model.weights[l].cols(); ++c) {
                check_entry(&model.weights[l](r, c), analytic.weights[l](r, c));
            }
        }
        for (Index r = 0; r < model.biases[l].size(); ++r) {
            check_entry(&model.biases[l][r], analytic.biases[l][r]);
        }
    }
    return report;
}

} // namespace tpad

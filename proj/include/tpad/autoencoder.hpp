#pragma once

#include <cstdint>
#include <vector>

#include "tpad/types.hpp"

namespace tpad {

enum class Activation { tanh, identity };

/// Symmetric encoder/decoder stack description. layer_sizes runs
/// [m, h1, ..., p, ..., h1, m] with the bottleneck p at the center;
/// activations[l] applies to the transition producing layer l+1.
///
/// The transition into the bottleneck and the output transition are always
/// identity (inputs are z-normalized and unbounded); hidden transitions are
/// tanh in the standard configuration but may be identity for purely linear
/// stacks.
struct AeArchitecture {
    std::vector<int> layer_sizes;
    std::vector<Activation> activations;

    /// Standard activation rule over the given sizes: tanh everywhere except
    /// the bottleneck-producing and output transitions.
    static AeArchitecture standard(std::vector<int> sizes);

    /// All-identity transitions (a deep linear autoencoder).
    static AeArchitecture linear(std::vector<int> sizes);

    /// Default shape for an m -> p reduction when nothing else is specified:
    /// two hidden layers per side of width max(16, 4p).
    static AeArchitecture for_dims(Index m, int p);

    Index input_dim() const { return layer_sizes.front(); }
    int bottleneck() const;
    size_t num_transitions() const { return layer_sizes.size() - 1; }
    /// Index of the transition whose output is the bottleneck layer.
    size_t bottleneck_transition() const { return layer_sizes.size() / 2 - 1; }

    Index num_parameters() const;
    void validate() const;
};

struct TrainConfig {
    double learning_rate = 1e-3;
    int batch_size = 32;
    int max_epochs = 500;
    int patience = 20;              // early-stop epochs without val improvement
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainLog {
    std::vector<double> train_mse; // per epoch, after that epoch's updates
    std::vector<double> val_mse;
    int best_epoch = -1;           // epoch of the returned snapshot
};

struct AeModel {
    AeArchitecture arch;
    std::vector<Matrix> weights; // weights[l]: layer_sizes[l+1] x layer_sizes[l]
    std::vector<Vector> biases;  // biases[l]: layer_sizes[l+1]
    TrainLog train_log;

    Index m() const { return arch.input_dim(); }
    int p() const { return arch.bottleneck(); }
};

/// Fresh model with uniform(+-sqrt(6/(fan_in+fan_out))) weights and zero
/// biases, deterministic per seed.
AeModel init_ae(const AeArchitecture& arch, std::uint64_t seed);

struct ForwardCache {
    std::vector<Matrix> activations; // activations[0] = x ... activations[L] = y
    std::vector<Matrix> preacts;     // preacts[l] = pre-activation of transition l
};

struct ForwardResult {
    Matrix y;           // reconstruction
    Matrix z;           // bottleneck activations
    ForwardCache cache; // retained for backward()
};

ForwardResult forward(const AeModel& model, const ConstMatrixRef& x);
Matrix reconstruct(const AeModel& model, const ConstMatrixRef& x);
Matrix encode(const AeModel& model, const ConstMatrixRef& x);

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
};

/// Gradients of the per-coordinate reconstruction MSE
/// (|x - y|^2 summed, divided by n*m) with respect to every parameter.
/// The cache must come from a forward() call on the same model and x.
Gradients backward(const AeModel& model, const ConstMatrixRef& x, const ForwardCache& cache);

/// Adam-optimized training with early stopping on a held-out validation
/// fraction. Returns the best-validation snapshot; deterministic per
/// cfg.seed. Throws TrainingError if the loss turns non-finite.
AeModel train(const ConstMatrixRef& train_x, const AeArchitecture& arch, const TrainConfig& cfg);

struct GradCheckReport {
    double max_rel_dev = 0.0; // worst relative deviation beyond the absolute floor
    bool pass = false;
    Index params_checked = 0;
};

/// Compares backward() against central finite differences on a random
/// small model and batch. Entries agree if the absolute difference is
/// under abs_floor or the relative deviation is under rel_tolerance.
GradCheckReport grad_check(const AeArchitecture& arch, double rel_tolerance, std::uint64_t seed,
                           double abs_floor = 1e-7, double fd_step = 1e-5);

} // namespace tpad

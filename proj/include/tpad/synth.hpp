#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tpad/dataset.hpp"
#include "tpad/types.hpp"

namespace tpad {

// ---------------------------------------------------------------------------
// Water-tank system: two signals (level H, outflow q_o) tied by q_o = a*sqrt(H),
// H uniform on [h_min, h_max], Gaussian measurement noise on both signals.
// Ground truth for manifold learning and anomaly injection.
// ---------------------------------------------------------------------------

struct WaterTankParams {
    double a = 1.0;          // flow coefficient
    double h_min = 1.0;      // level range; h_min == h_max is a degenerate uniform
    double h_max = 10.0;
    double noise_std = 0.02; // measurement noise, same units as the signals
    Index n = 10000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Normal operation data; labels all 0. Columns "H", "q_o".
Dataset gen_watertank(const WaterTankParams& p);

enum class TankAnomalyKind {
    off_manifold, ///< displaced perpendicular to the curve; breaks q_o = a*sqrt(H)
    out_of_range, ///< H outside [h_min, h_max] but exactly on the curve
};

TankAnomalyKind parse_tank_anomaly_kind(const std::string& name);

/// `count` anomalous observations cycling through `kinds`; labels all 1.
/// off_manifold points carry a vertical residual |q_o - a*sqrt(H)| of at
/// least 6*noise_std by construction; out_of_range points satisfy the curve
/// exactly but draw H beyond the normal level range.
Dataset gen_watertank_anomalies(const WaterTankParams& p,
                                const std::vector<TankAnomalyKind>& kinds, Index count);

// ---------------------------------------------------------------------------
// Nonlinearity-pool generator: latent z ~ Uniform(-1,1)^latent_dim observed
// through a mix of identity, product, cube, shared-phase waveform pair and
// linear-mix columns, plus Gaussian noise. Intrinsic dimensionality of the
// output equals latent_dim by construction.
// ---------------------------------------------------------------------------

enum class NonlinOp { product, cube, time_pair, linear_mix };

NonlinOp parse_nonlin_op(const std::string& name);
std::string nonlin_op_name(NonlinOp op);

struct NonlinPoolParams {
    int latent_dim = 1;
    int obs_dim = 2;             // >= latent_dim
    std::vector<NonlinOp> ops;   // cycled to fill obs_dim - latent_dim columns
    double noise_std = 0.0;
    Index n = 1000;
    std::uint64_t seed = 0;

    void validate() const;
};

/// One generated column: its name, human-readable formula and the latent
/// indices it depends on.
struct ColumnSpec {
    std::string name;
    std::string formula;
    std::vector<int> sources;
};

struct NonlinPoolResult {
    Dataset data;
    std::vector<ColumnSpec> manifest;
    NonlinPoolParams params;
};

NonlinPoolResult gen_nonlin_pool(const NonlinPoolParams& p);

/// Manifest as a JSON document: per-column formula and source latents.
std::string manifest_json(const NonlinPoolResult& result);

} // namespace tpad

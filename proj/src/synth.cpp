#include "tpad/synth.hpp"

#include <cmath>
#include <functional>
#include <nlohmann/json.hpp>

#include "tpad/format.hpp"
#include "tpad/rng.hpp"

namespace tpad {

namespace {
constexpr double kPi = 3.141592653589793238462643383279;
}

void WaterTankParams::validate() const {
    if (!(a > 0.0)) throw ParamError("watertank: a must be > 0");
    if (!(h_min > 0.0)) throw ParamError("watertank: h_min must be > 0");
    if (!(h_max >= h_min)) throw ParamError("watertank: h_max must be >= h_min");
    if (!(noise_std >= 0.0)) throw ParamError("watertank: noise_std must be >= 0");
    if (n < 1) throw ParamError("watertank: n must be >= 1");
}

Dataset gen_watertank(const WaterTankParams& p) {
    p.validate();
    Rng rng(p.seed);
    Dataset data;
    data.x.resize(p.n, 2);
    for (Index i = 0; i < p.n; ++i) {
        double h = rng.uniform(p.h_min, p.h_max);
        double q = p.a * std::sqrt(h);
        data.x(i, 0) = h + rng.gaussian(0.0, p.noise_std);
        data.x(i, 1) = q + rng.gaussian(0.0, p.noise_std);
    }
    data.column_names = {"H", "q_o"};
    data.labels = std::vector<int>(static_cast<size_t>(p.n), 0);
    return data;
}

TankAnomalyKind parse_tank_anomaly_kind(const std::string& name) {
    if (name == "off_manifold") return TankAnomalyKind::off_manifold;
    if (name == "out_of_range") return TankAnomalyKind::out_of_range;
    throw ParamError("unknown anomaly kind '" + name + "'");
}

Dataset gen_watertank_anomalies(const WaterTankParams& p,
                                const std::vector<TankAnomalyKind>& kinds, Index count) {
    p.validate();
    if (count < 1) throw ParamError("watertank anomalies: count must be >= 1");
    if (kinds.empty()) throw ParamError("watertank anomalies: kinds must be non-empty");

    // separate stream from the normal data of the same seed
    Rng rng = Rng(p.seed).child(0x616e6f6d);
    const double span = (p.h_max > p.h_min) ? (p.h_max - p.h_min) : std::max(p.h_max, 1.0);

    Dataset data;
    data.x.resize(count, 2);
    for (Index i = 0; i < count; ++i) {
        TankAnomalyKind kind = kinds[static_cast<size_t>(i) % kinds.size()];
        if (kind == TankAnomalyKind::off_manifold) {
            // Start on the curve, displace along the local normal. The sqrt
            // curve is concave, so a perpendicular displacement of magnitude
            // 6*noise_std*sqrt(1+s^2) guarantees a vertical residual of at
            // least 6*noise_std for either displacement sign.
            double h0 = rng.uniform(p.h_min, p.h_max);
            double s = p.a / (2.0 * std::sqrt(h0)); // local slope dq/dH
            double unit = std::sqrt(1.0 + s * s);
            double mag = (6.0 + 6.0 * rng.uniform()) * p.noise_std * unit;
            double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
            double h = h0 + sign * mag * (-s / unit);
            double q = p.a * std::sqrt(h0) + sign * mag * (1.0 / unit);
            data.x(i, 0) = std::max(h, 1e-9);
            data.x(i, 1) = q;
        } else {
            // On the curve but outside the level range: offset 1%..4.5% of the
            // span beyond the boundary. Close enough that a well-trained model
            // still reconstructs the point, far enough that latent bounds
            // calibrated on normal data exclude it.
            double offset = rng.uniform(0.01, 0.045) * span;
            bool high_side = rng.uniform() < 0.5;
            if (!high_side && p.h_min - offset <= 0.0) high_side = true;
            double h = high_side ? p.h_max + offset : p.h_min - offset;
            data.x(i, 0) = h;
            data.x(i, 1) = p.a * std::sqrt(h);
        }
    }
    data.column_names = {"H", "q_o"};
    data.labels = std::vector<int>(static_cast<size_t>(count), 1);
    return data;
}

// ---------------------------------------------------------------------------
// Nonlinearity pool
// ---------------------------------------------------------------------------

NonlinOp parse_nonlin_op(const std::string& name) {
    if (name == "product") return NonlinOp::product;
    if (name == "cube") return NonlinOp::cube;
    if (name == "time_pair") return NonlinOp::time_pair;
    if (name == "linear_mix") return NonlinOp::linear_mix;
    throw ParamError("unknown nonlinearity '" + name + "'");
}

std::string nonlin_op_name(NonlinOp op) {
    switch (op) {
        case NonlinOp::product: return "product";
        case NonlinOp::cube: return "cube";
        case NonlinOp::time_pair: return "time_pair";
        case NonlinOp::linear_mix: return "linear_mix";
    }
    return "?";
}

void NonlinPoolParams::validate() const {
    if (latent_dim < 1) throw ParamError("nonlin pool: latent_dim must be >= 1");
    if (obs_dim < latent_dim) throw ParamError("nonlin pool: obs_dim must be >= latent_dim");
    if (ops.empty()) throw ParamError("nonlin pool: ops list is empty");
    if (!(noise_std >= 0.0)) throw ParamError("nonlin pool: noise_std must be >= 0");
    if (n < 1) throw ParamError("nonlin pool: n must be >= 1");
}

namespace {

struct ColumnDef {
    ColumnSpec spec;
    // evaluates the clean (noise-free) value from the latent row
    std::function<double(const Vector&)> eval;
};

std::string zname(int i) { return "z" + std::to_string(i); }

} // namespace

NonlinPoolResult gen_nonlin_pool(const NonlinPoolParams& p) {
    p.validate();
    Rng rng(p.seed);

    // Column plan first: op source indices and mix coefficients are fixed
    // per dataset, drawn once from the seed.
    std::vector<ColumnDef> cols;
    for (int j = 0; j < p.latent_dim; ++j) {
        ColumnDef def;
        def.spec = {"x" + std::to_string(j), zname(j), {j}};
        def.eval = [j](const Vector& z) { return z[j]; };
        cols.push_back(std::move(def));
    }

    size_t op_cursor = 0;
    while (static_cast<int>(cols.size()) < p.obs_dim) {
        const int col_idx = static_cast<int>(cols.size());
        const int remaining = p.obs_dim - col_idx;
        NonlinOp op = p.ops[op_cursor % p.ops.size()];
        ++op_cursor;
        switch (op) {
            case NonlinOp::product: {
                int i = 0, j = 0;
                if (p.latent_dim >= 2) {
                    i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.latent_dim)));
                    j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.latent_dim - 1)));
                    if (j >= i) ++j;
                    if (i > j) std::swap(i, j);
                }
                ColumnDef def;
                def.spec = {"x" + std::to_string(col_idx), zname(i) + "*" + zname(j), {i, j}};
                def.eval = [i, j](const Vector& z) { return z[i] * z[j]; };
                cols.push_back(std::move(def));
                break;
            }
            case NonlinOp::cube: {
                int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.latent_dim)));
                ColumnDef def;
                def.spec = {"x" + std::to_string(col_idx), zname(i) + "^3", {i}};
                def.eval = [i](const Vector& z) { return z[i] * z[i] * z[i]; };
                cols.push_back(std::move(def));
                break;
            }
            case NonlinOp::time_pair: {
                // two waveforms of one shared phase latent
                int i = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(p.latent_dim)));
                ColumnDef a;
                a.spec = {"x" + std::to_string(col_idx), "sin(2*pi*" + zname(i) + ")", {i}};
                a.eval = [i](const Vector& z) { return std::sin(2.0 * kPi * z[i]); };
                cols.push_back(std::move(a));
                if (remaining >= 2) {
                    ColumnDef b;
                    b.spec = {"x" + std::to_string(col_idx + 1),
                              "tanh(6*sin(pi*" + zname(i) + "))",
                              {i}};
                    b.eval = [i](const Vector& z) { return std::tanh(6.0 * std::sin(kPi * z[i])); };
                    cols.push_back(std::move(b));
                }
                break;
            }
            case NonlinOp::linear_mix: {
                Vector coeffs(p.latent_dim);
                for (int i = 0; i < p.latent_dim; ++i) coeffs[i] = rng.uniform(-1.0, 1.0);
                std::string formula;
                std::vector<int> sources;
                for (int i = 0; i < p.latent_dim; ++i) {
                    if (i > 0) formula += " + ";
                    formula += format_double(coeffs[i]) + "*" + zname(i);
                    sources.push_back(i);
                }
                ColumnDef def;
                def.spec = {"x" + std::to_string(col_idx), formula, sources};
                def.eval = [coeffs](const Vector& z) { return coeffs.dot(z); };
                cols.push_back(std::move(def));
                break;
            }
        }
    }

    NonlinPoolResult result;
    result.params = p;
    result.data.x.resize(p.n, p.obs_dim);
    Vector z(p.latent_dim);
    for (Index row = 0; row < p.n; ++row) {
        for (int j = 0; j < p.latent_dim; ++j) z[j] = rng.uniform(-1.0, 1.0);
        for (int j = 0; j < p.obs_dim; ++j) {
            double clean = cols[static_cast<size_t>(j)].eval(z);
            result.data.x(row, j) = clean + rng.gaussian(0.0, p.noise_std);
        }
    }
    for (const auto& def : cols) {
        result.data.column_names.push_back(def.spec.name);
        result.manifest.push_back(def.spec);
    }
    result.data.labels = std::vector<int>(static_cast<size_t>(p.n), 0);
    return result;
}

std::string manifest_json(const NonlinPoolResult& result) {
    nlohmann::json doc;
    doc["latent_dim"] = result.params.latent_dim;
    doc["obs_dim"] = result.params.obs_dim;
    doc["noise_std"] = result.params.noise_std;
    doc["n"] = result.params.n;
    doc["seed"] = result.params.seed;
    doc["columns"] = nlohmann::json::array();
    for (const auto& col : result.manifest) {
        doc["columns"].push_back({{"name", col.name},
                                  {"formula", col.formula},
                                  {"sources", col.sources}});
    }
    return doc.dump(2) + "\n";
}

} // namespace tpad

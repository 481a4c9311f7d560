#include "tpad/dimsweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <thread>

#include "tpad/errors.hpp"
#include "tpad/format.hpp"
#include "tpad/linalg.hpp"
#include "tpad/pca.hpp"
#include "tpad/rng.hpp"

namespace tpad {

SweepMethod parse_sweep_method(const std::string& name) {
    if (name == "pca") return SweepMethod::pca;
    if (name == "ae") return SweepMethod::ae;
    throw ParamError("unknown sweep method '" + name + "'");
}

std::string sweep_method_name(SweepMethod method) {
    return method == SweepMethod::pca ? "pca" : "ae";
}

namespace {

double run_cell(const Dataset& data, SweepMethod method, int p, const FoldPlan& plan, int fold,
                const SweepConfig& cfg, std::uint64_t cell_seed) {
    Matrix x_train = take_rows(data.x, plan.training_indices(fold));
    Matrix x_val = take_rows(data.x, plan.validation_indices(fold));

    Normalizer norm = fit_normalizer(x_train);
    Matrix train_n = apply(norm, x_train);
    Matrix val_n = apply(norm, x_val);

    if (method == SweepMethod::pca) {
        PcaModel model = fit_pca(train_n, p);
        return mse(reconstruct(model, val_n), val_n);
    }

    TrainConfig train_cfg = cfg.ae_train;
    train_cfg.seed = cell_seed;
    train_cfg.batch_size = static_cast<int>(
        std::min<Index>(train_cfg.batch_size, train_n.rows()));
    AeModel model = train(train_n, AeArchitecture::for_dims(data.m(), p), train_cfg);
    return mse(reconstruct(model, val_n), val_n);
}

} // namespace

SweepResult sweep(const Dataset& data, SweepMethod method, int p_min, int p_max,
                  const SweepConfig& cfg) {
    if (cfg.folds < 2) throw ParamError("sweep: folds must be >= 2");
    if (p_min < 1 || static_cast<Index>(p_max) > data.m() || p_min > p_max) {
        throw ParamError("sweep: p range [" + std::to_string(p_min) + ", " + std::to_string(p_max) +
                         "] invalid for m=" + std::to_string(data.m()));
    }

    Rng master(cfg.seed);
    Rng fold_rng = master.child(0x666f6c64);
    FoldPlan plan = kfold(data.n(), cfg.folds, fold_rng);

    SweepResult result;
    result.method = method;
    for (int p = p_min; p <= p_max; ++p) result.p_values.push_back(p);

    const size_t num_p = result.p_values.size();
    const size_t cells = num_p * static_cast<size_t>(cfg.folds);
    std::vector<double> grid(cells, 0.0);

    // Cells are independent; each derives its own seed from (seed, p, fold),
    // so the grid is bit-identical no matter the execution order.
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        while (true) {
            size_t cell = next.fetch_add(1);
            if (cell >= cells) return;
            {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (failure) return;
            }
            const size_t pi = cell / static_cast<size_t>(cfg.folds);
            const int fold = static_cast<int>(cell % static_cast<size_t>(cfg.folds));
            const int p = result.p_values[pi];
            try {
                std::uint64_t cell_seed =
                    master.child(static_cast<std::uint64_t>(p) * 1000003ull +
                                 static_cast<std::uint64_t>(fold))
                        .next_u64();
                grid[cell] = run_cell(data, method, p, plan, fold, cfg, cell_seed);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) {
                    failure = std::make_exception_ptr(
                        Error("sweep cell p=" + std::to_string(p) + ", fold=" +
                              std::to_string(fold) + ": " + e.what()));
                }
                return;
            }
        }
    };

    unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                         : std::max(1u, std::thread::hardware_concurrency());
    n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cells));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    for (size_t pi = 0; pi < num_p; ++pi) {
        const double* row = grid.data() + pi * static_cast<size_t>(cfg.folds);
        double sum = 0.0, min = row[0];
        for (int f = 0; f < cfg.folds; ++f) {
            sum += row[f];
            min = std::min(min, row[f]);
        }
        const double mean = sum / cfg.folds;
        double var = 0.0;
        for (int f = 0; f < cfg.folds; ++f) var += (row[f] - mean) * (row[f] - mean);
        result.mse_mean.push_back(mean);
        result.mse_min.push_back(min);
        result.mse_std.push_back(std::sqrt(var / cfg.folds));
    }
    return result;
}

DimEstimate estimate_dim(const SweepResult& sweep, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ParamError("estimate_dim: fraction must be in (0, 1)");
    }
    if (sweep.p_values.empty() || sweep.p_values.front() < 1) {
        throw ParamError("estimate_dim: sweep must cover a p range starting at >= 1");
    }
    for (size_t i = 0; i + 1 < sweep.p_values.size(); ++i) {
        if (sweep.p_values[i + 1] != sweep.p_values[i] + 1) {
            throw ParamError("estimate_dim: p range must be contiguous");
        }
    }

    // normalized data: per-coordinate variance is 1, so the baseline MSE is 1
    constexpr double baseline = 1.0;
    for (size_t i = 0; i < sweep.p_values.size(); ++i) {
        if (sweep.mse_min[i] / baseline < fraction) {
            return {sweep.p_values[i], false};
        }
    }

    if (sweep.p_values.size() < 3) {
        throw EstimationError("estimate_dim: no p below threshold and too few points for an elbow");
    }

    // elbow fallback: largest second difference of log MSE
    std::vector<double> log_mse;
    for (double v : sweep.mse_min) log_mse.push_back(std::log(std::max(v, 1e-300)));
    size_t best = 1;
    double best_curv = -std::numeric_limits<double>::infinity();
    for (size_t i = 1; i + 1 < log_mse.size(); ++i) {
        double curv = log_mse[i + 1] - 2.0 * log_mse[i] + log_mse[i - 1];
        if (curv > best_curv) {
            best_curv = curv;
            best = i;
        }
    }
    return {sweep.p_values[best], true};
}

std::string sweep_result_json(const SweepResult& result) {
    nlohmann::json doc;
    doc["method"] = sweep_method_name(result.method);
    doc["p_values"] = result.p_values;
    doc["mse_mean"] = result.mse_mean;
    doc["mse_min"] = result.mse_min;
    doc["mse_std"] = result.mse_std;
    if (result.estimated_dim) {
        doc["estimated_dim"] = *result.estimated_dim;
        doc["estimate_used_fallback"] = result.estimate_used_fallback;
    }
    return doc.dump(2) + "\n";
}

std::string sweep_result_csv(const SweepResult& result) {
    std::ostringstream out;
    out << "p,mse_min,mse_mean,mse_std,method\n";
    for (size_t i = 0; i < result.p_values.size(); ++i) {
        out << result.p_values[i] << ',' << format_double(result.mse_min[i]) << ','
            << format_double(result.mse_mean[i]) << ',' << format_double(result.mse_std[i]) << ','
            << sweep_method_name(result.method) << '\n';
    }
    return out.str();
}

} // namespace tpad

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tpad/errors.hpp"
#include "tpad/rng.hpp"
#include "tpad/types.hpp"

namespace tpad {

/// n observations of m signals, with optional binary anomaly labels
/// (1 = anomaly) and unique column names. Immutable by convention after
/// construction; safe for concurrent reads.
struct Dataset {
    Matrix x;
    std::optional<std::vector<int>> labels;
    std::vector<std::string> column_names;

    Index n() const { return x.rows(); }
    Index m() const { return x.cols(); }

    /// Checks the type invariants; throws on violation.
    void validate() const;
};

/// Per-column mean and population standard deviation fitted on training
/// data only. Near-constant columns get scale 1.0 instead of a degenerate
/// value (CPPS data routinely contain constant status signals).
struct Normalizer {
    Vector mean;
    Vector scale;

    static constexpr double kScaleFloor = 1e-8;

    Index m() const { return mean.size(); }
};

Normalizer fit_normalizer(const ConstMatrixRef& train);
Normalizer fit_normalizer(const Dataset& train);

/// (x - mean) / scale, column-wise.
Matrix apply(const Normalizer& norm, const ConstMatrixRef& x);
/// x * scale + mean, column-wise; inverse of apply.
Matrix invert(const Normalizer& norm, const ConstMatrixRef& x);

/// Balanced k-fold assignment over n observations.
struct FoldPlan {
    int k = 0;
    std::vector<int> assignments; // fold index per observation, in [0, k)

    std::vector<Index> validation_indices(int fold) const;
    std::vector<Index> training_indices(int fold) const;
};

/// Deterministic per seed; fold sizes differ by at most one.
FoldPlan kfold(Index n, int k, Rng& rng);

/// Rows of x selected by index, in order.
Matrix take_rows(const ConstMatrixRef& x, const std::vector<Index>& rows);

// ---------------------------------------------------------------------------
// CSV: UTF-8, header row, one observation per row, ',' separator,
// '.' decimal point, no locale dependence. Values are emitted with
// shortest round-trip formatting. Missing values are a hard error.
// ---------------------------------------------------------------------------

/// Loads a CSV file. If label_column is given, that column is removed from
/// the feature matrix and parsed as binary labels (cells must be 0 or 1).
/// Parse failures report row and column.
Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes the dataset; if labels are present they are appended as an extra
/// integer column (default name "label").
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_column_name = "label");

} // namespace tpad

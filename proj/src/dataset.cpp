#include "tpad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tpad/format.hpp"

namespace tpad {

void Dataset::validate() const {
    if (labels && static_cast<Index>(labels->size()) != n()) {
        throw ShapeError("Dataset: labels length " + std::to_string(labels->size()) +
                         " != n " + std::to_string(n()));
    }
    if (static_cast<Index>(column_names.size()) != m()) {
        throw ShapeError("Dataset: column_names length " + std::to_string(column_names.size()) +
                         " != m " + std::to_string(m()));
    }
    std::unordered_set<std::string> seen;
    for (const auto& name : column_names) {
        if (!seen.insert(name).second) {
            throw FormatError("Dataset: duplicate column name '" + name + "'");
        }
    }
    if (labels) {
        for (int v : *labels) {
            if (v != 0 && v != 1) throw FormatError("Dataset: labels must be 0/1");
        }
    }
}

Normalizer fit_normalizer(const ConstMatrixRef& train) {
    const Index n = train.rows();
    const Index m = train.cols();
    if (n < 2) {
        throw InsufficientDataError("fit_normalizer: need at least 2 observations, got " +
                                    std::to_string(n));
    }
    Normalizer norm;
    norm.mean = train.colwise().mean();
    norm.scale.resize(m);
    for (Index j = 0; j < m; ++j) {
        // population (1/n) standard deviation; matches "variance one" exactly
        // on the training split
        double var = (train.col(j).array() - norm.mean[j]).square().sum() / static_cast<double>(n);
        double std = std::sqrt(var);
        norm.scale[j] = (std < Normalizer::kScaleFloor) ? 1.0 : std;
    }
    return norm;
}

Normalizer fit_normalizer(const Dataset& train) {
    return fit_normalizer(train.x);
}

Matrix apply(const Normalizer& norm, const ConstMatrixRef& x) {
    if (x.cols() != norm.m()) {
        throw ShapeError("Normalizer::apply: x has " + std::to_string(x.cols()) +
                         " columns, normalizer has " + std::to_string(norm.m()));
    }
    return (x.rowwise() - norm.mean.transpose()).array().rowwise() /
           norm.scale.transpose().array();
}

Matrix invert(const Normalizer& norm, const ConstMatrixRef& x) {
    if (x.cols() != norm.m()) {
        throw ShapeError("Normalizer::invert: x has " + std::to_string(x.cols()) +
                         " columns, normalizer has " + std::to_string(norm.m()));
    }
    return (x.array().rowwise() * norm.scale.transpose().array()).matrix().rowwise() +
           norm.mean.transpose();
}

std::vector<Index> FoldPlan::validation_indices(int fold) const {
    std::vector<Index> out;
    for (size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) out.push_back(static_cast<Index>(i));
    }
    return out;
}

std::vector<Index> FoldPlan::training_indices(int fold) const {
    std::vector<Index> out;
    for (size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) out.push_back(static_cast<Index>(i));
    }
    return out;
}

FoldPlan kfold(Index n, int k, Rng& rng) {
    if (k < 2 || static_cast<Index>(k) > n) {
        throw ParamError("kfold: need 2 <= k <= n, got k=" + std::to_string(k) +
                         ", n=" + std::to_string(n));
    }
    FoldPlan plan;
    plan.k = k;
    plan.assignments.resize(static_cast<size_t>(n));
    auto perm = rng.permutation(n);
    for (Index i = 0; i < n; ++i) {
        plan.assignments[static_cast<size_t>(perm[static_cast<size_t>(i)])] =
            static_cast<int>(i % k);
    }
    return plan;
}

Matrix take_rows(const ConstMatrixRef& x, const std::vector<Index>& rows) {
    Matrix out(static_cast<Index>(rows.size()), x.cols());
    for (size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Index>(i)) = x.row(rows[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

Dataset load_csv(const std::filesystem::path& path,
                 const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw FormatError("load_csv: cannot open '" + path.string() + "'");
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("load_csv: '" + path.string() + "' is empty (no header)");
    }
    std::vector<std::string> header = split_line(line);

    Index label_idx = -1;
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) {
            throw ConfigError("load_csv: label column '" + *label_column + "' not found in '" +
                              path.string() + "'");
        }
        label_idx = static_cast<Index>(it - header.begin());
    }

    const Index total_cols = static_cast<Index>(header.size());
    const Index m = label_idx >= 0 ? total_cols - 1 : total_cols;

    std::vector<double> values;
    std::vector<int> labels;
    Index n = 0;
    Index row = 1; // header was row 0
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        std::vector<std::string> cells = split_line(line);
        if (static_cast<Index>(cells.size()) != total_cols) {
            throw FormatError("load_csv: row " + std::to_string(row) + " has " +
                              std::to_string(cells.size()) + " cells, expected " +
                              std::to_string(total_cols));
        }
        for (Index j = 0; j < total_cols; ++j) {
            const std::string& cell = cells[static_cast<size_t>(j)];
            if (j == label_idx) {
                if (cell == "0") {
                    labels.push_back(0);
                } else if (cell == "1") {
                    labels.push_back(1);
                } else {
                    throw FormatError("load_csv: row " + std::to_string(row) + ", column '" +
                                      header[static_cast<size_t>(j)] + "': label must be 0 or 1, got '" +
                                      cell + "'");
                }
                continue;
            }
            double v = 0.0;
            if (!try_parse_double(cell, v) || !std::isfinite(v)) {
                throw FormatError("load_csv: row " + std::to_string(row) + ", column '" +
                                  header[static_cast<size_t>(j)] + "': cannot parse '" + cell + "'");
            }
            values.push_back(v);
        }
        ++n;
        ++row;
    }

    Dataset data;
    data.x.resize(n, m);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < m; ++j) {
            data.x(i, j) = values[static_cast<size_t>(i * m + j)];
        }
    }
    for (Index j = 0; j < total_cols; ++j) {
        if (j != label_idx) data.column_names.push_back(header[static_cast<size_t>(j)]);
    }
    if (label_idx >= 0) data.labels = std::move(labels);
    data.validate();
    return data;
}

void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_column_name) {
    data.validate();
    std::ofstream out(path);
    if (!out) {
        throw FormatError("save_csv: cannot open '" + path.string() + "' for writing");
    }
    for (Index j = 0; j < data.m(); ++j) {
        if (j > 0) out << ',';
        out << data.column_names[static_cast<size_t>(j)];
    }
    if (data.labels) out << ',' << label_column_name;
    out << '\n';

    for (Index i = 0; i < data.n(); ++i) {
        for (Index j = 0; j < data.m(); ++j) {
            if (j > 0) out << ',';
            out << format_double(data.x(i, j));
        }
        if (data.labels) out << ',' << (*data.labels)[static_cast<size_t>(i)];
        out << '\n';
    }
    if (!out) {
        throw FormatError("save_csv: write to '" + path.string() + "' failed");
    }
}

} // namespace tpad

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "tpad/types.hpp"

namespace tpad {

/// ROC over all distinct score thresholds, ties grouped into single steps.
/// The trapezoidal area equals the Mann-Whitney statistic
/// P(score_anom > score_norm) + 0.5 * P(tie).
struct RocCurve {
    std::vector<std::pair<double, double>> points; // (fpr, tpr), from (0,0) to (1,1)
    double auc = 0.0;
};

/// Higher score = more anomalous; labels are 0/1 with both classes present.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);
RocCurve roc_auc(const ConstVectorRef& scores, const std::vector<int>& labels);

struct EvalReport {
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    bool f1_degenerate = false; // 0/0 convention fired somewhere
    std::optional<double> auc;  // filled when a continuous score was evaluated
};

/// Confusion counts plus precision/recall/F1 on the anomaly class.
/// 0/0 ratios resolve to 0 and set f1_degenerate.
EvalReport confusion(const std::vector<int>& predictions, const std::vector<int>& labels);

} // namespace tpad

#include "tpad/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "tpad/errors.hpp"

namespace tpad {

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw ShapeError("roc_auc: scores and labels lengths differ");
    }
    if (scores.empty()) throw EvalError("roc_auc: empty input");
    long pos = std::count(labels.begin(), labels.end(), 1);
    long neg = static_cast<long>(labels.size()) - pos;
    if (pos == 0 || neg == 0) {
        throw EvalError("roc_auc: need both classes, got " + std::to_string(pos) + " positives of " +
                        std::to_string(labels.size()));
    }

    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    double auc = 0.0;
    long tp = 0, fp = 0;
    size_t i = 0;
    while (i < order.size()) {
        // one step per distinct score value; a tie block moves diagonally
        size_t j = i;
        long dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]] == 1) {
                ++dtp;
            } else {
                ++dfp;
            }
            ++j;
        }
        double fpr0 = static_cast<double>(fp) / static_cast<double>(neg);
        double tpr0 = static_cast<double>(tp) / static_cast<double>(pos);
        tp += dtp;
        fp += dfp;
        double fpr1 = static_cast<double>(fp) / static_cast<double>(neg);
        double tpr1 = static_cast<double>(tp) / static_cast<double>(pos);
        auc += (fpr1 - fpr0) * (tpr0 + tpr1) / 2.0;
        curve.points.emplace_back(fpr1, tpr1);
        i = j;
    }
    curve.auc = auc;
    return curve;
}

RocCurve roc_auc(const ConstVectorRef& scores, const std::vector<int>& labels) {
    return roc_auc(std::vector<double>(scores.data(), scores.data() + scores.size()), labels);
}

EvalReport confusion(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw ShapeError("confusion: predictions and labels lengths differ");
    }
    EvalReport rep;
    for (size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == 1) {
            (labels[i] == 1 ? rep.tp : rep.fp) += 1;
        } else {
            (labels[i] == 1 ? rep.fn : rep.tn) += 1;
        }
    }
    auto ratio = [&rep](long num, long den) {
        if (den == 0) {
            rep.f1_degenerate = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    rep.precision = ratio(rep.tp, rep.tp + rep.fp);
    rep.recall = ratio(rep.tp, rep.tp + rep.fn);
    double denom = rep.precision + rep.recall;
    if (denom == 0.0) {
        rep.f1 = 0.0;
        rep.f1_degenerate = true;
    } else {
        rep.f1 = 2.0 * rep.precision * rep.recall / denom;
    }
    return rep;
}

} // namespace tpad

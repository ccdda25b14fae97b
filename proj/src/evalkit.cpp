#include "mess/evalkit.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace mess {

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw std::invalid_argument("scores/labels length mismatch");
    RocCurve roc;
    for (bool l : labels) (l ? roc.positives : roc.negatives)++;
    if (roc.positives == 0 || roc.negatives == 0) throw std::invalid_argument("degenerate labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    roc.points.emplace_back(0.0, 0.0);
    const double P = static_cast<double>(roc.positives);
    const double N = static_cast<double>(roc.negatives);
    std::size_t tp = 0, fp = 0, i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        // consume the whole tie group before emitting one point
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[order[i]] ? tp : fp)++;
            ++i;
        }
        roc.points.emplace_back(static_cast<double>(fp) / N, static_cast<double>(tp) / P);
    }
    return roc;
}

double auc(const RocCurve& roc) {
    double area = 0.0;
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        const auto& [x0, y0] = roc.points[i - 1];
        const auto& [x1, y1] = roc.points[i];
        area += (x1 - x0) * 0.5 * (y0 + y1);
    }
    return area;
}

double power_at_specificity(const RocCurve& roc, double specificity) {
    if (!(specificity > 0.0) || !(specificity < 1.0))
        throw std::invalid_argument("specificity must be in (0,1)");
    const double fpr = 1.0 - specificity;
    for (std::size_t i = 1; i < roc.points.size(); ++i) {
        const auto& [x0, y0] = roc.points[i - 1];
        const auto& [x1, y1] = roc.points[i];
        if (fpr <= x1) {
            if (x1 == x0) return std::max(y0, y1);
            const double w = (fpr - x0) / (x1 - x0);
            return y0 + w * (y1 - y0);
        }
    }
    return 1.0;
}

}  // namespace mess

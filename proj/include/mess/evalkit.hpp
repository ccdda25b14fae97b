#ifndef MESS_EVALKIT_HPP
#define MESS_EVALKIT_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace mess {

// ROC sweep points (fpr, tpr), from (0,0) to (1,1); tied scores collapse to
// a single sweep point.
struct RocCurve {
    std::vector<std::pair<double, double>> points;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

// higher score = more significant; callers negate p-values
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels);

// trapezoidal area under the curve
double auc(const RocCurve& roc);

// TPR at FPR = 1 - specificity, linearly interpolated between sweep points
double power_at_specificity(const RocCurve& roc, double specificity);

}  // namespace mess

#endif

#include "hyperlat/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace hyperlat {

double auroc(const std::vector<double>& scores, const std::vector<double>& labels) {
    const size_t n = scores.size();
    size_t pos = 0;
    for (double y : labels)
        if (y > 0.5) ++pos;
    const size_t neg = n - pos;
    if (pos == 0 || neg == 0) return 0.5;

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Average ranks across ties, then the Mann–Whitney statistic.
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) rank[idx[k]] = r;
        i = j + 1;
    }
    double rank_sum = 0.0;
    for (size_t k = 0; k < n; ++k)
        if (labels[k] > 0.5) rank_sum += rank[k];
    const double u = rank_sum - 0.5 * static_cast<double>(pos) * static_cast<double>(pos + 1);
    return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

double auprc(const std::vector<double>& scores, const std::vector<double>& labels) {
    const size_t n = scores.size();
    size_t total_pos = 0;
    for (double y : labels)
        if (y > 0.5) ++total_pos;
    if (total_pos == 0) return 0.0;

    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    size_t tp = 0;
    for (size_t k = 0; k < n; ++k) {
        if (labels[idx[k]] > 0.5) {
            ++tp;
            ap += static_cast<double>(tp) / static_cast<double>(k + 1);
        }
    }
    return ap / static_cast<double>(total_pos);
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.empty()) return 0.0;
    size_t hit = 0;
    for (size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++hit;
    return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels,
                int num_classes) {
    double f1_sum = 0.0;
    int present = 0;
    for (int c = 0; c < num_classes; ++c) {
        size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == c) ++support;
            if (predictions[i] == c && labels[i] == c) ++tp;
            else if (predictions[i] == c) ++fp;
            else if (labels[i] == c) ++fn;
        }
        if (support == 0) continue;
        ++present;
        const double denom = 2.0 * tp + fp + fn;
        f1_sum += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp) / denom;
    }
    return present == 0 ? 0.0 : f1_sum / present;
}

} // namespace hyperlat

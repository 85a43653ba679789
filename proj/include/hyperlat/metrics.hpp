#pragma once

#include <cstddef>
#include <vector>

namespace hyperlat {

// Rank-based AUROC (Mann–Whitney, average ranks on ties). Returns 0.5 when
// a class is missing.
double auroc(const std::vector<double>& scores, const std::vector<double>& labels);

// Average precision over the score-descending ranking.
double auprc(const std::vector<double>& scores, const std::vector<double>& labels);

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Unweighted mean of per-class F1 over classes present in the labels.
double macro_f1(const std::vector<int>& predictions, const std::vector<int>& labels,
                int num_classes);

} // namespace hyperlat

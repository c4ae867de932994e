#include "mmenc/folds.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mmenc/error.hpp"

namespace mmenc {

FoldPlan make_folds(Eigen::Index n, int k)
{
    if (k < 1) throw ConfigError("k must be positive");
    if (n < 10 * static_cast<Eigen::Index>(k))
        throw ConfigError(fmt::format("{} events is too few for {} folds (need at least {})", n, k, 10 * k));
    const auto b1 = static_cast<Eigen::Index>(std::llround(0.8 * static_cast<double>(n)));
    const auto b2 = static_cast<Eigen::Index>(std::llround(0.9 * static_cast<double>(n)));

    FoldPlan plan{n, k, {}};
    for (int f = 0; f < k; ++f) {
        const Eigen::Index offset = static_cast<Eigen::Index>(f) * n / k;
        Fold fold;
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Index idx = (offset + i) % n;
            if (i < b1)
                fold.train.push_back(idx);
            else if (i < b2)
                fold.val.push_back(idx);
            else
                fold.test.push_back(idx);
        }
        plan.folds.push_back(std::move(fold));
    }
    return plan;
}

namespace {

bool circular_arc(std::vector<Eigen::Index> s, Eigen::Index n)
{
    if (s.empty() || static_cast<Eigen::Index>(s.size()) == n) return true;
    std::sort(s.begin(), s.end());
    int gaps = 0;
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] - s[i - 1] > 1) ++gaps;
    if (s.front() + n - s.back() > 1) ++gaps;
    return gaps <= 1;
}

}  // namespace

std::vector<std::string> check_fold_plan(const FoldPlan& plan)
{
    std::vector<std::string> issues;
    const auto n = plan.n_events;
    for (std::size_t f = 0; f < plan.folds.size(); ++f) {
        const auto& fold = plan.folds[f];
        std::vector<int> owner(static_cast<std::size_t>(n), -1);
        const std::vector<Eigen::Index>* sets[] = {&fold.train, &fold.val, &fold.test};
        const char* names[] = {"train", "val", "test"};
        for (int s = 0; s < 3; ++s) {
            if (sets[s]->empty()) issues.push_back(fmt::format("fold {}: empty {} split", f, names[s]));
            for (auto i : *sets[s]) {
                if (i < 0 || i >= n) {
                    issues.push_back(fmt::format("fold {}: index {} out of range", f, i));
                    continue;
                }
                auto& o = owner[static_cast<std::size_t>(i)];
                if (o >= 0)
                    issues.push_back(fmt::format("fold {}: index {} appears in {} and {}", f, i, names[o], names[s]));
                else
                    o = s;
            }
            if (!circular_arc(*sets[s], n)) issues.push_back(fmt::format("fold {}: {} split is not contiguous", f, names[s]));
        }
        const auto missing = std::count(owner.begin(), owner.end(), -1);
        if (missing > 0) issues.push_back(fmt::format("fold {}: {} events assigned to no split", f, missing));
    }
    return issues;
}

}  // namespace mmenc

#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace mmenc {

/// Row indices of one cross-validation fold. Each set is a contiguous arc of
/// the events in movie order, possibly wrapping past the last event.
struct Fold
{
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> val;
    std::vector<Eigen::Index> test;
};

struct FoldPlan
{
    Eigen::Index n_events = 0;
    int k = 0;
    std::vector<Fold> folds;
};

/// Contiguous 80/10/10 folds; fold f rotates all boundaries by floor(f n / k)
/// around the circle of events. Requires n >= 10 k.
FoldPlan make_folds(Eigen::Index n_events, int k = 5);

/// Empty when every fold partitions [0, n) into three disjoint contiguous arcs.
std::vector<std::string> check_fold_plan(const FoldPlan& plan);

}  // namespace mmenc

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "brs/tensor.hpp"

namespace brs {

struct GradCheckBlock {
    std::string name;
    double max_rel_err = 0.0;
    bool flagged = false;
};

struct GradCheckReport {
    std::vector<GradCheckBlock> blocks;
    double max_rel_err = 0.0;
    bool ok() const {
        for (const auto& b : blocks)
            if (b.flagged) return false;
        return true;
    }
    std::string summary() const;
};

// Scalar loss of the parameter blocks, and its analytic gradient.
using LossFn = std::function<double(const std::vector<Tensor>&)>;
using GradFn = std::function<std::vector<Tensor>(const std::vector<Tensor>&)>;

// Central finite differences against the analytic gradient, one relative
// error per parameter block. The forward must be deterministic; the checker
// evaluates it twice up front and rejects if the values differ. Differences
// are accumulated in long double so truncation of the step does not mask
// real bugs. Relative error per element is |a - n| / max(1e-8, |a| + |n|).
GradCheckReport finite_diff_check(const LossFn& loss, const GradFn& grad,
                                  const std::vector<Tensor>& params,
                                  const std::vector<std::string>& names, double tolerance,
                                  double step = 1e-4);

}  // namespace brs

#include "brs/gradcheck.hpp"

#include <cmath>
#include <sstream>

namespace brs {

std::string GradCheckReport::summary() const {
    std::ostringstream os;
    for (const auto& b : blocks) {
        os << b.name << ": max_rel_err=" << b.max_rel_err << (b.flagged ? " FLAGGED" : "")
           << "\n";
    }
    return os.str();
}

GradCheckReport finite_diff_check(const LossFn& loss, const GradFn& grad,
                                  const std::vector<Tensor>& params,
                                  const std::vector<std::string>& names, double tolerance,
                                  double step) {
    if (params.size() != names.size()) {
        throw ShapeError("finite_diff_check: one name per parameter block required");
    }
    const double l0 = loss(params);
    const double l1 = loss(params);
    if (l0 != l1) {
        throw Error("finite_diff_check: forward is not deterministic (" + std::to_string(l0) +
                    " vs " + std::to_string(l1) + ")");
    }

    const std::vector<Tensor> analytic = grad(params);
    if (analytic.size() != params.size()) {
        throw ShapeError("finite_diff_check: gradient block count mismatch");
    }

    GradCheckReport report;
    std::vector<Tensor> work = params;
    for (std::size_t b = 0; b < params.size(); ++b) {
        require_same_shape(analytic[b], params[b], "finite_diff_check grad block");
        GradCheckBlock block;
        block.name = names[b];
        for (std::int64_t i = 0; i < params[b].numel(); ++i) {
            const double saved = work[b][i];
            work[b][i] = saved + step;
            const long double fp = loss(work);
            work[b][i] = saved - step;
            const long double fm = loss(work);
            work[b][i] = saved;
            const double numeric =
                static_cast<double>((fp - fm) / (2.0L * static_cast<long double>(step)));
            const double a = analytic[b][i];
            const double rel = std::fabs(a - numeric) /
                               std::max(1e-8, std::fabs(a) + std::fabs(numeric));
            if (rel > block.max_rel_err) block.max_rel_err = rel;
        }
        block.flagged = block.max_rel_err > tolerance;
        report.max_rel_err = std::max(report.max_rel_err, block.max_rel_err);
        report.blocks.push_back(std::move(block));
    }
    return report;
}

}  // namespace brs

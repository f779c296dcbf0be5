#pragma once

#include <functional>
#include <string>
#include <vector>

#include "tgdfer/optim.hpp"
#include "tgdfer/tensor.hpp"

namespace tgdfer {

struct GradCheckEntry {
    std::string name;
    std::size_t numel = 0;
    double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
    double absolute_error = 0.0;  // ||analytic - numeric||
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;

    double max_relative_error() const;
    bool passed(double tolerance) const;
};

// Compares reverse-mode gradients of `loss_fn` against central finite
// differences for every tensor in `params`. `loss_fn` must rebuild the graph
// from the current parameter values on each call. When both gradient norms
// fall below the rounding floor of the differences (about 1e3·eps·|loss|/step
// per sqrt(element)), the absolute error stands in for the relative one.
GradCheckReport check_gradients(const std::function<Tensor()>& loss_fn, const ParameterSet& params,
                                double step = 1e-5);

}  // namespace tgdfer

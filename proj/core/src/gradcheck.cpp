#include "tgdfer/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tgdfer/autograd.hpp"

namespace tgdfer {

double GradCheckReport::max_relative_error() const {
    double worst = 0.0;
    for (const auto& e : entries) worst = std::max(worst, e.relative_error);
    return worst;
}

bool GradCheckReport::passed(double tolerance) const {
    return std::all_of(entries.begin(), entries.end(),
                       [tolerance](const GradCheckEntry& e) { return e.relative_error < tolerance; });
}

GradCheckReport check_gradients(const std::function<Tensor()>& loss_fn, const ParameterSet& params, double step) {
    auto clear_grads = [&params] {
        for (const auto& e : params) Tensor(e.tensor).zero_grad();
    };
    clear_grads();
    const Tensor base = loss_fn();
    const double loss_scale = std::max(1.0, std::abs(base.item()));
    backward(base);

    GradCheckReport report;
    for (const auto& entry : params) {
        Tensor t = entry.tensor;
        std::vector<double> analytic(t.numel(), 0.0);
        if (t.has_grad()) std::copy(t.grad().begin(), t.grad().end(), analytic.begin());

        auto values = t.mutable_values();
        double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double original = values[i];
            values[i] = original + step;
            const double up = loss_fn().item();
            values[i] = original - step;
            const double down = loss_fn().item();
            values[i] = original;
            const double numeric = (up - down) / (2.0 * step);
            diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
            a2 += analytic[i] * analytic[i];
            n2 += numeric * numeric;
        }
        GradCheckEntry e;
        e.name = entry.name;
        e.numel = values.size();
        e.absolute_error = std::sqrt(diff2);
        // Rounding in the loss bounds what the differences can resolve; a
        // gradient below that floor is indistinguishable from zero.
        const double noise_floor = 1e3 * std::numeric_limits<double>::epsilon() * loss_scale / step *
                                   std::sqrt(static_cast<double>(values.size()));
        const double scale = std::max(std::sqrt(a2), std::sqrt(n2));
        e.relative_error = scale < noise_floor ? e.absolute_error : e.absolute_error / scale;
        report.entries.push_back(std::move(e));
    }
    clear_grads();
    return report;
}

}  // namespace tgdfer

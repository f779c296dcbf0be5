#include "tgdfer/random.hpp"

#include <cmath>

namespace tgdfer {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x7467u};
    return Rng(seq);
}

Tensor normal_tensor(Rng& rng, Shape shape, double stddev, bool requires_grad) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<double> values(shape_numel(shape));
    for (auto& v : values) v = dist(rng);
    return Tensor::from(std::move(shape), std::move(values), requires_grad);
}

Tensor truncated_normal_tensor(Rng& rng, Shape shape, double stddev, bool requires_grad) {
    std::normal_distribution<double> dist(0.0, stddev);
    std::vector<double> values(shape_numel(shape));
    for (auto& v : values) {
        do {
            v = dist(rng);
        } while (std::abs(v) > 2.0 * stddev);
    }
    return Tensor::from(std::move(shape), std::move(values), requires_grad);
}

}  // namespace tgdfer

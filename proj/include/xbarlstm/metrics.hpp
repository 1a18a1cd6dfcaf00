#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace xbarlstm {

inline double mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size() || pred.empty())
        throw std::invalid_argument("mse_loss: need equal nonempty lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        acc += d * d;
    }
    return acc / static_cast<double>(pred.size());
}

inline double rmse(std::span<const double> pred, std::span<const double> actual) {
    return std::sqrt(mse_loss(pred, actual));
}

} // namespace xbarlstm

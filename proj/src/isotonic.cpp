#include "fracneu/isotonic.hpp"

#include <stdexcept>

namespace fracneu {

std::vector<double> isotonic_nondecreasing(const std::vector<double>& y,
                                           const std::vector<double>& w,
                                           std::optional<double> lower_bound) {
    if (y.size() != w.size())
        throw std::invalid_argument("isotonic_nondecreasing: size mismatch");
    const std::size_t n = y.size();
    // pool-adjacent-violators; each pool carries its weighted mean
    std::vector<double> val(n), wt(n);
    std::vector<std::size_t> count(n);
    std::size_t top = 0;
    for (std::size_t i = 0; i < n; ++i) {
        val[top] = y[i];
        wt[top] = w[i];
        count[top] = 1;
        ++top;
        while (top > 1 && val[top - 2] > val[top - 1]) {
            double tw = wt[top - 2] + wt[top - 1];
            val[top - 2] = (val[top - 2] * wt[top - 2] + val[top - 1] * wt[top - 1]) / tw;
            wt[top - 2] = tw;
            count[top - 2] += count[top - 1];
            --top;
        }
    }
    std::vector<double> out(n);
    std::size_t pos = 0;
    for (std::size_t k = 0; k < top; ++k) {
        double v = val[k];
        if (lower_bound && v < *lower_bound) v = *lower_bound;
        for (std::size_t c = 0; c < count[k]; ++c) out[pos++] = v;
    }
    return out;
}

}  // namespace fracneu

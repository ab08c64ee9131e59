#include "seeto/types.hpp"

#include <algorithm>
#include <cmath>

#include "seeto/error.hpp"

namespace seeto {

Bounds::Bounds(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || lower_.empty()) {
        throw UsageError("Bounds: lower and upper must be non-empty and of equal length");
    }
    for (std::size_t i = 0; i < lower_.size(); ++i) {
        if (!(lower_[i] < upper_[i]) || !std::isfinite(lower_[i]) || !std::isfinite(upper_[i])) {
            throw UsageError("Bounds: lower[" + std::to_string(i) + "] must be < upper");
        }
    }
}

Bounds Bounds::unit(std::size_t dim) {
    return Bounds(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

bool Bounds::contains(std::span<const double> x) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
    }
    return true;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw UsageError("dominates: objective vectors differ in length");
    }
    bool strictly_better = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] > b[i]) return false;
        if (a[i] < b[i]) strictly_better = true;
    }
    return strictly_better;
}

DecisionVector normalize_decision(std::span<const double> x, const Bounds& b) {
    if (!b.contains(x)) {
        throw UsageError("normalize_decision: vector outside bounds");
    }
    DecisionVector u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        u[i] = (x[i] - b.lower()[i]) / (b.upper()[i] - b.lower()[i]);
    }
    return u;
}

DecisionVector denormalize_decision(std::span<const double> u, const Bounds& b) {
    if (!Bounds::unit(b.dim()).contains(u)) {
        throw UsageError("denormalize_decision: vector outside [0,1]^d");
    }
    DecisionVector x(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double lo = b.lower()[i];
        const double hi = b.upper()[i];
        x[i] = u[i] == 1.0 ? hi : lo + u[i] * (hi - lo);
    }
    return x;
}

void clip_unit(DecisionVector& u) {
    for (double& v : u) v = std::clamp(v, 0.0, 1.0);
}

}  // namespace seeto

#include "seeto/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "seeto/error.hpp"

namespace seeto {

namespace {

void check_ref(std::span<const ObjectiveVector> front, std::span<const double> ref) {
    for (double r : ref) {
        if (!std::isfinite(r)) throw UsageError("hypervolume: reference point must be finite");
    }
    for (const auto& p : front) {
        if (p.size() != ref.size()) throw UsageError("hypervolume: point and reference dimensions differ");
        for (double v : p) {
            if (!std::isfinite(v)) throw UsageError("hypervolume: front contains a non-finite value");
        }
    }
}

}  // namespace

double hypervolume_2d(std::span<const ObjectiveVector> front, std::span<const double> ref) {
    if (ref.size() != 2) throw UsageError("hypervolume_2d: reference must be 2-dimensional");
    check_ref(front, ref);
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : front) {
        if (p[0] < ref[0] && p[1] < ref[1]) pts.emplace_back(p[0], p[1]);
    }
    std::sort(pts.begin(), pts.end());
    // Staircase of points that lower the running f2 minimum, in f1 order.
    std::vector<std::pair<double, double>> stairs;
    for (const auto& pt : pts) {
        if (stairs.empty() || pt.second < stairs.back().second) stairs.push_back(pt);
    }
    double area = 0.0;
    for (std::size_t i = 0; i < stairs.size(); ++i) {
        const double next_f1 = i + 1 < stairs.size() ? stairs[i + 1].first : ref[0];
        area += (next_f1 - stairs[i].first) * (ref[1] - stairs[i].second);
    }
    return area;
}

HvEstimate hypervolume_monte_carlo(std::span<const ObjectiveVector> front, std::span<const double> ref,
                                   std::uint64_t samples, std::uint64_t seed) {
    check_ref(front, ref);
    if (samples == 0) throw UsageError("hypervolume_monte_carlo: need at least one sample");
    const std::size_t m = ref.size();
    std::vector<const ObjectiveVector*> useful;
    std::vector<double> lo(ref.begin(), ref.end());
    for (const auto& p : front) {
        bool inside = true;
        for (std::size_t k = 0; k < m; ++k) inside = inside && p[k] < ref[k];
        if (!inside) continue;
        useful.push_back(&p);
        for (std::size_t k = 0; k < m; ++k) lo[k] = std::min(lo[k], p[k]);
    }
    if (useful.empty()) return {};
    double box = 1.0;
    for (std::size_t k = 0; k < m; ++k) box *= ref[k] - lo[k];

    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> dist;
    for (std::size_t k = 0; k < m; ++k) dist.emplace_back(lo[k], ref[k]);
    std::vector<double> y(m);
    std::uint64_t hits = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (std::size_t k = 0; k < m; ++k) y[k] = dist[k](rng);
        for (const auto* p : useful) {
            bool dom = true;
            for (std::size_t k = 0; k < m && dom; ++k) dom = (*p)[k] <= y[k];
            if (dom) {
                ++hits;
                break;
            }
        }
    }
    const double n = static_cast<double>(samples);
    const double frac = static_cast<double>(hits) / n;
    return {box * frac, box * std::sqrt(frac * (1.0 - frac) / n)};
}

double hypervolume(std::span<const ObjectiveVector> front, std::span<const double> ref) {
    if (ref.size() == 2) return hypervolume_2d(front, ref);
    return hypervolume_monte_carlo(front, ref, 1'000'000, 0x48560).value;
}

double delta_hv_percent(double hv_algo, double hv_ref_algo) {
    if (!(hv_ref_algo > 0.0)) throw UndefinedMetricError("delta_hv_percent: reference HV must be positive");
    return 100.0 * (hv_algo - hv_ref_algo) / hv_ref_algo;
}

std::string AdditionalFe::to_string() const {
    char buf[64];
    if (reached) {
        std::snprintf(buf, sizeof buf, "%.2f%%", percent);
    } else {
        std::snprintf(buf, sizeof buf, ">%.0f%%", percent);
    }
    return buf;
}

AdditionalFe additional_fe_percent(std::span<const double> incumbent_hv, double hv_target, std::uint64_t base_fe,
                                   std::uint64_t fe_max) {
    if (base_fe == 0) throw UsageError("additional_fe_percent: base FE must be positive");
    const double base = static_cast<double>(base_fe);
    AdditionalFe out;
    for (std::size_t i = 0; i < incumbent_hv.size(); ++i) {
        if (incumbent_hv[i] >= hv_target) {
            const auto fe = static_cast<std::uint64_t>(i + 1);
            out.reached = true;
            out.fe = fe;
            // Reaching the target early is not a negative cost.
            out.percent = fe <= base_fe ? 0.0 : 100.0 * (static_cast<double>(fe) - base) / base;
            return out;
        }
    }
    out.percent = 100.0 * (static_cast<double>(fe_max) - base) / base;
    return out;
}

}  // namespace seeto

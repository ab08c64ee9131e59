#include "seeto/problems.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "seeto/error.hpp"

namespace seeto {

Bounds default_calibration_bounds() {
    return Bounds({5e-6, 0.5, 1.0, 8000.0, 3e-4}, {2e-5, 2.0, 3.0, 30000.0, 8e-4});
}

SyntheticTask::SyntheticTask(TaskId id, TaskState state, std::vector<double> shift, double delta, Bounds bounds)
    : id_(std::move(id)), state_(std::move(state)), shift_(std::move(shift)), delta_(delta), bounds_(std::move(bounds)) {
    if (shift_.size() != bounds_.dim()) throw UsageError("SyntheticTask: shift dimension differs from bounds");
    if (!(delta_ >= 0.0 && delta_ <= 0.5)) throw UsageError("SyntheticTask: delta must lie in [0, 0.5]");
    state_.validate();
}

ObjectiveVector SyntheticTask::evaluate_normalized(std::span<const double> u) const {
    if (u.size() != shift_.size()) throw UsageError("SyntheticTask: decision dimension mismatch");
    const std::size_t d = u.size();
    double rest = 0.0;
    for (std::size_t i = 1; i < d; ++i) rest += (u[i] - shift_[i]) * (u[i] - shift_[i]);
    if (d > 1) rest /= static_cast<double>(d - 1);
    const double g1 = u[0] - shift_[0];
    const double g2 = u[0] - shift_[0] - delta_;
    return {std::sqrt(g1 * g1 + rest), std::sqrt(g2 * g2 + rest)};
}

ObjectiveVector SyntheticTask::do_evaluate(std::span<const double> theta) const {
    if (!bounds_.contains(theta)) throw UsageError("SyntheticTask::evaluate: parameters outside bounds");
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
    return evaluate_normalized(normalize_decision(theta, bounds_));
}

double analytic_hv(double delta, std::span<const double> ref) {
    if (ref.size() != 2) throw UsageError("analytic_hv: reference must be 2-dimensional");
    const bool ok = delta == 0.0 ? (ref[0] > 0.0 && ref[1] > 0.0) : (ref[0] > delta && ref[1] > delta);
    if (!ok) throw UsageError("analytic_hv: reference point must dominate-bound the front");
    // The dominated box minus the triangle below the line f1 + f2 = delta.
    return ref[0] * ref[1] - 0.5 * delta * delta;
}

double analytic_hv(const SyntheticTask& task, std::span<const double> ref) { return analytic_hv(task.delta(), ref); }

std::vector<double> ShiftMap::operator()(const TaskState& s) const {
    const auto mean = s.mean_frame();
    if (static_cast<Eigen::Index>(mean.size()) != gain.cols()) {
        throw UsageError("ShiftMap: state size does not match the gain matrix");
    }
    const Eigen::Map<const Eigen::VectorXd> x(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const Eigen::VectorXd a = gain * x + offset;
    std::vector<double> out(static_cast<std::size_t>(a.size()));
    for (Eigen::Index i = 0; i < a.size(); ++i) out[static_cast<std::size_t>(i)] = std::clamp(a(i), 0.1, 0.9);
    return out;
}

ShiftMap make_shift_map(std::size_t dim, std::size_t input_dim, double scale, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale / std::sqrt(static_cast<double>(input_dim)));
    ShiftMap map;
    map.gain.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(input_dim));
    for (Eigen::Index r = 0; r < map.gain.rows(); ++r) {
        for (Eigen::Index c = 0; c < map.gain.cols(); ++c) map.gain(r, c) = normal(rng);
    }
    map.offset = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(dim), 0.5);
    return map;
}

TaskFamily make_task_family(const TaskFamilyParams& p) {
    const std::size_t frame_size = p.channels * p.height * p.width;
    if (frame_size < 2) throw UsageError("make_task_family: state grid needs at least 2 cells");
    if (p.frames < 1) throw UsageError("make_task_family: at least one frame per task");
    if (p.outlier_targets > p.n_target) throw UsageError("make_task_family: more outliers than targets");
    if (p.n_source == 0 && p.n_target > p.outlier_targets) {
        throw UsageError("make_task_family: in-cluster targets need at least one source");
    }
    if (!(p.cluster_spread >= 0.0)) throw UsageError("make_task_family: spread must be >= 0");

    const auto dsz = static_cast<Eigen::Index>(frame_size);
    const auto kc = static_cast<Eigen::Index>(std::clamp<std::size_t>(p.cluster_modes, 1, frame_size - 1));
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> normal;
    auto gaussian = [&](Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
        return v;
    };

    Eigen::MatrixXd raw(dsz, dsz);
    for (Eigen::Index c = 0; c < dsz; ++c) raw.col(c) = gaussian(dsz);
    const Eigen::MatrixXd basis = Eigen::HouseholderQR<Eigen::MatrixXd>(raw).householderQ();
    const Eigen::MatrixXd cluster_modes = basis.leftCols(kc);
    const Eigen::MatrixXd outlier_modes = basis.rightCols(dsz - kc);

    const Eigen::VectorXd center = gaussian(dsz);
    const Eigen::VectorXd outlier_dir = outlier_modes * gaussian(dsz - kc).normalized();
    const Eigen::VectorXd outlier_center = center + p.outlier_distance * outlier_dir;
    const double sigma = p.cluster_spread;

    const ShiftMap shift = make_shift_map(default_calibration_bounds().dim(), frame_size, p.shift_scale);

    auto make_state = [&](const Eigen::VectorXd& base_without_noise) {
        const Eigen::VectorXd base = base_without_noise + p.pixel_noise * sigma * gaussian(dsz);
        TaskState s;
        s.channels = p.channels;
        s.height = p.height;
        s.width = p.width;
        for (std::size_t t = 0; t < p.frames; ++t) {
            const Eigen::VectorXd f = base + p.frame_noise * sigma * gaussian(dsz);
            s.frames.emplace_back(f.data(), f.data() + f.size());
        }
        return s;
    };
    auto make_task = [&](const std::string& id, TaskState s) {
        auto a = shift(s);
        return SyntheticTask(id, std::move(s), std::move(a), p.delta, default_calibration_bounds());
    };

    TaskFamily fam;
    fam.params = p;
    std::vector<Eigen::VectorXd> coeffs;
    for (std::size_t i = 0; i < p.n_source; ++i) {
        coeffs.push_back(sigma * gaussian(kc));
        fam.sources.push_back(make_task("source-" + std::to_string(i + 1), make_state(center + cluster_modes * coeffs.back())));
    }
    const std::size_t in_cluster = p.n_target - p.outlier_targets;
    for (std::size_t j = 0; j < in_cluster; ++j) {
        const std::size_t parent = std::uniform_int_distribution<std::size_t>(0, p.n_source - 1)(rng);
        const Eigen::VectorXd xi = coeffs[parent] + p.target_jitter * sigma * gaussian(kc);
        fam.parent.push_back(parent);
        fam.targets.push_back(make_task("target-" + std::to_string(j + 1), make_state(center + cluster_modes * xi)));
    }
    for (std::size_t j = in_cluster; j < p.n_target; ++j) {
        const Eigen::VectorXd xi = sigma * gaussian(kc);
        fam.targets.push_back(
            make_task("target-" + std::to_string(j + 1), make_state(outlier_center + cluster_modes * xi)));
    }
    return fam;
}

}  // namespace seeto

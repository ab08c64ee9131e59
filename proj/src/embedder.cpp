#include "seeto/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "seeto/error.hpp"

namespace seeto {

std::vector<double> TaskState::mean_frame() const {
    validate();
    std::vector<double> mean(frame_size(), 0.0);
    for (const auto& f : frames) {
        for (std::size_t i = 0; i < f.size(); ++i) mean[i] += f[i];
    }
    for (double& v : mean) v /= static_cast<double>(frames.size());
    return mean;
}

void TaskState::validate() const {
    if (frames.empty()) throw UsageError("TaskState: at least one frame required");
    if (frame_size() == 0) throw UsageError("TaskState: empty grid shape");
    for (const auto& f : frames) {
        if (f.size() != frame_size()) throw UsageError("TaskState: frame size does not match shape");
        for (double v : f) {
            if (!std::isfinite(v)) throw UsageError("TaskState: non-finite entry");
        }
    }
}

Embedder::Embedder(std::size_t channels, std::size_t height, std::size_t width, Eigen::VectorXd mean,
                   Eigen::MatrixXd basis, bool degenerate)
    : channels_(channels),
      height_(height),
      width_(width),
      mean_(std::move(mean)),
      basis_(std::move(basis)),
      degenerate_(degenerate) {
    if (static_cast<std::size_t>(mean_.size()) != channels * height * width ||
        basis_.rows() != mean_.size() || basis_.cols() < 1) {
        throw UsageError("Embedder: inconsistent mean/basis shapes");
    }
}

std::vector<double> Embedder::encode(std::span<const double> frame) const {
    if (frame.size() != input_dim()) throw UsageError("Embedder::encode: frame shape mismatch");
    std::vector<double> z(latent_dim(), 0.0);
    if (degenerate_) {
        z[0] = 1.0;
        return z;
    }
    const Eigen::Map<const Eigen::VectorXd> x(frame.data(), static_cast<Eigen::Index>(frame.size()));
    const Eigen::VectorXd centered = x - mean_;
    Eigen::Map<Eigen::VectorXd>(z.data(), static_cast<Eigen::Index>(z.size())) = basis_.transpose() * centered;
    return z;
}

std::vector<double> Embedder::reconstruct(std::span<const double> frame) const {
    if (frame.size() != input_dim()) throw UsageError("Embedder::reconstruct: frame shape mismatch");
    const Eigen::Map<const Eigen::VectorXd> x(frame.data(), static_cast<Eigen::Index>(frame.size()));
    Eigen::VectorXd out = mean_;
    if (!degenerate_) out += basis_ * (basis_.transpose() * (x - mean_));
    return {out.data(), out.data() + out.size()};
}

double Embedder::reconstruction_mse(std::span<const TaskState> states) const {
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& s : states) {
        for (const auto& f : s.frames) {
            const auto r = reconstruct(f);
            double err = 0.0;
            for (std::size_t i = 0; i < f.size(); ++i) err += (f[i] - r[i]) * (f[i] - r[i]);
            total += err;
            ++count;
        }
    }
    if (count == 0) throw UsageError("reconstruction_mse: no frames");
    return total / static_cast<double>(count);
}

namespace {

// Extends `basis` (orthonormal columns 0..filled-1) to `basis.cols()`
// orthonormal columns with seeded Gaussian directions and Gram-Schmidt.
void complete_basis(Eigen::MatrixXd& basis, Eigen::Index filled, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const Eigen::Index dim = basis.rows();
    for (Eigen::Index c = filled; c < basis.cols();) {
        Eigen::VectorXd v(dim);
        for (Eigen::Index i = 0; i < dim; ++i) v(i) = normal(rng);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < c; ++k) v -= basis.col(k).dot(v) * basis.col(k);
        }
        const double n = v.norm();
        if (n < 1e-8) continue;
        basis.col(c++) = v / n;
    }
}

// Largest-magnitude entry of every column made positive.
void fix_signs(Eigen::MatrixXd& basis) {
    for (Eigen::Index c = 0; c < basis.cols(); ++c) {
        Eigen::Index arg = 0;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0.0) basis.col(c) *= -1.0;
    }
}

}  // namespace

Embedder fit_embedder(std::span<const TaskState> states, std::size_t latent_dim, std::uint64_t seed) {
    if (states.empty()) throw UsageError("fit_embedder: at least one state required");
    const TaskState& first = states.front();
    first.validate();
    const std::size_t dim = first.frame_size();
    if (latent_dim < 1 || latent_dim > dim) {
        throw UsageError("fit_embedder: latent dimension must lie in [1, flattened frame size]");
    }

    std::size_t rows = 0;
    for (const auto& s : states) {
        s.validate();
        if (s.channels != first.channels || s.height != first.height || s.width != first.width) {
            throw UsageError("fit_embedder: states differ in grid shape");
        }
        rows += s.frames.size();
    }

    Eigen::MatrixXd data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(dim));
    Eigen::Index r = 0;
    for (const auto& s : states) {
        for (const auto& f : s.frames) {
            data.row(r++) = Eigen::Map<const Eigen::RowVectorXd>(f.data(), static_cast<Eigen::Index>(dim));
        }
    }
    const Eigen::VectorXd mean = data.colwise().mean().transpose();
    const Eigen::MatrixXd centered = data.rowwise() - mean.transpose();

    const auto q = static_cast<Eigen::Index>(latent_dim);
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), q);

    const double scale = std::max(1.0, mean.cwiseAbs().maxCoeff());
    if (centered.cwiseAbs().maxCoeff() <= 1e-14 * scale) {
        complete_basis(basis, 0, seed);
        return Embedder(first.channels, first.height, first.width, mean, basis, true);
    }

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = sv(0) * 1e-12;
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    const Eigen::Index keep = std::min(rank, q);
    basis.leftCols(keep) = svd.matrixV().leftCols(keep);
    fix_signs(basis);
    if (keep < q) complete_basis(basis, keep, seed);
    return Embedder(first.channels, first.height, first.width, mean, basis, false);
}

LatentSeries embed(const Embedder& e, const TaskState& s, TaskId id) {
    s.validate();
    if (s.channels != e.channels() || s.height != e.height() || s.width != e.width()) {
        throw UsageError("embed: state shape does not match the embedder");
    }
    LatentSeries out{std::move(id), {}};
    out.vectors.reserve(s.frames.size());
    for (const auto& f : s.frames) out.vectors.push_back(e.encode(f));
    return out;
}

double task_similarity(const LatentSeries& a, const LatentSeries& b) {
    if (a.vectors.size() != b.vectors.size() || a.vectors.empty()) {
        throw UsageError("task_similarity: series lengths differ or are empty");
    }
    double total = 0.0;
    for (std::size_t t = 0; t < a.vectors.size(); ++t) {
        const auto& za = a.vectors[t];
        const auto& zb = b.vectors[t];
        if (za.size() != zb.size()) throw UsageError("task_similarity: latent dimensions differ");
        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t i = 0; i < za.size(); ++i) {
            dot += za[i] * zb[i];
            na += za[i] * za[i];
            nb += zb[i] * zb[i];
        }
        if (!(na > 0.0) || !std::isfinite(na)) {
            throw DegeneracyError("task_similarity: zero-norm latent vector for task '" + a.task_id + "'");
        }
        if (!(nb > 0.0) || !std::isfinite(nb)) {
            throw DegeneracyError("task_similarity: zero-norm latent vector for task '" + b.task_id + "'");
        }
        total += dot / (std::sqrt(na) * std::sqrt(nb));
    }
    return std::clamp(total / static_cast<double>(a.vectors.size()), -1.0, 1.0);
}

double SimilarityReport::max_weight() const {
    return weights.empty() ? 0.0 : *std::max_element(weights.begin(), weights.end());
}

double SimilarityReport::max_similarity() const {
    double best = -1.0;
    for (const auto& [id, s] : per_source) best = std::max(best, s);
    return best;
}

SimilarityReport select_and_weight(std::span<const std::pair<TaskId, double>> sims, std::size_t gamma,
                                   double temperature) {
    if (sims.empty()) throw UsageError("select_and_weight: no source similarities");
    if (gamma < 1) throw UsageError("select_and_weight: gamma must be >= 1");
    if (!(temperature > 0.0)) throw UsageError("select_and_weight: temperature must be > 0");

    std::vector<std::size_t> order(sims.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return sims[l].second > sims[r].second; });
    order.resize(std::min(gamma, sims.size()));

    SimilarityReport report;
    report.per_source.assign(sims.begin(), sims.end());
    const double top = sims[order.front()].second;
    double total = 0.0;
    for (std::size_t idx : order) {
        report.selected.push_back(sims[idx].first);
        report.weights.push_back(std::exp((sims[idx].second - top) / temperature));
        total += report.weights.back();
    }
    for (double& w : report.weights) w /= total;
    return report;
}

}  // namespace seeto

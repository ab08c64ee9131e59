#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "seeto/types.hpp"

namespace seeto {

// Observed state series of one task: T frames, each a channels x height x width
// grid stored row-major (channel, row, column).
struct TaskState {
    std::size_t channels = 1;
    std::size_t height = 1;
    std::size_t width = 1;
    std::vector<std::vector<double>> frames;

    [[nodiscard]] std::size_t frame_size() const noexcept { return channels * height * width; }
    [[nodiscard]] std::size_t length() const noexcept { return frames.size(); }

    // Element-wise mean over time.
    [[nodiscard]] std::vector<double> mean_frame() const;

    // Throws UsageError when T == 0, a frame has the wrong size, or an entry is not finite.
    void validate() const;

    bool operator==(const TaskState&) const = default;
};

// One latent vector per frame.
struct LatentSeries {
    TaskId task_id;
    std::vector<std::vector<double>> vectors;
};

// Linear principal-subspace encoder: z = B^T (x - mean), where the columns of
// B span the rank-q subspace minimizing mean squared reconstruction error over
// the training frames.
class Embedder {
public:
    Embedder() = default;
    Embedder(std::size_t channels, std::size_t height, std::size_t width, Eigen::VectorXd mean,
             Eigen::MatrixXd basis, bool degenerate);

    [[nodiscard]] std::size_t latent_dim() const noexcept { return static_cast<std::size_t>(basis_.cols()); }
    [[nodiscard]] std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean_.size()); }
    [[nodiscard]] std::size_t channels() const noexcept { return channels_; }
    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
    [[nodiscard]] const Eigen::MatrixXd& basis() const noexcept { return basis_; }

    // True when the training frames were all identical. Such an embedder maps
    // every frame to the first unit vector, so all tasks look alike.
    [[nodiscard]] bool degenerate() const noexcept { return degenerate_; }

    [[nodiscard]] std::vector<double> encode(std::span<const double> frame) const;
    [[nodiscard]] std::vector<double> reconstruct(std::span<const double> frame) const;

    // Mean over every frame of ||x - reconstruct(x)||^2.
    [[nodiscard]] double reconstruction_mse(std::span<const TaskState> states) const;

private:
    std::size_t channels_ = 0;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd basis_;
    bool degenerate_ = false;
};

inline constexpr std::size_t kDefaultLatentDim = 16;

// Fits the rank-q principal subspace of all frames of all states. The seed
// only matters when the data has rank below q: missing basis directions are
// completed from seeded random vectors.
[[nodiscard]] Embedder fit_embedder(std::span<const TaskState> states, std::size_t latent_dim,
                                    std::uint64_t seed);

[[nodiscard]] LatentSeries embed(const Embedder& e, const TaskState& s, TaskId id = {});

// Mean over time of the cosine between corresponding latent vectors.
[[nodiscard]] double task_similarity(const LatentSeries& a, const LatentSeries& b);

struct SimilarityReport {
    // Similarity of every source, in archive order.
    std::vector<std::pair<TaskId, double>> per_source;
    // Most similar sources, best first.
    std::vector<TaskId> selected;
    // Softmax weights aligned with `selected`.
    std::vector<double> weights;

    [[nodiscard]] double max_weight() const;
    [[nodiscard]] double max_similarity() const;
};

// Keeps the min(gamma, n) most similar sources (ties go to the earlier
// entry) and weights them by a temperature softmax over that subset only.
[[nodiscard]] SimilarityReport select_and_weight(std::span<const std::pair<TaskId, double>> sims,
                                                 std::size_t gamma, double temperature);

}  // namespace seeto

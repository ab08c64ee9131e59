#include "seeto/gp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "seeto/error.hpp"

namespace seeto {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

using Point2 = std::array<double, 2>;

// Bounded Nelder-Mead (vertices clamped into the box); maximizes f.
template <typename F>
std::pair<Point2, double> nelder_mead_max(F&& f, Point2 start, const Point2& lo, const Point2& hi,
                                          int max_evals) {
    auto clamp = [&](Point2 p) {
        for (int i = 0; i < 2; ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
        return p;
    };
    int evals = 0;
    auto value = [&](const Point2& p) {
        ++evals;
        return -f(p);  // minimize the negative
    };

    std::array<Point2, 3> v;
    std::array<double, 3> fv{};
    v[0] = clamp(start);
    for (int i = 0; i < 2; ++i) {
        Point2 p = v[0];
        const double step = 0.15 * (hi[i] - lo[i]);
        p[i] = p[i] + step <= hi[i] ? p[i] + step : p[i] - step;
        v[i + 1] = clamp(p);
    }
    for (int i = 0; i < 3; ++i) fv[i] = value(v[i]);

    while (evals < max_evals) {
        std::array<int, 3> idx{0, 1, 2};
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = idx[0], mid = idx[1], worst = idx[2];
        if (std::isfinite(fv[best]) && std::isfinite(fv[worst]) && std::abs(fv[worst] - fv[best]) < 1e-7 &&
            std::abs(v[worst][0] - v[best][0]) + std::abs(v[worst][1] - v[best][1]) < 1e-5) {
            break;
        }
        Point2 centroid{(v[best][0] + v[mid][0]) / 2, (v[best][1] + v[mid][1]) / 2};
        auto along = [&](double t) {
            return clamp({centroid[0] + t * (v[worst][0] - centroid[0]), centroid[1] + t * (v[worst][1] - centroid[1])});
        };
        const Point2 xr = along(-1.0);
        const double fr = value(xr);
        if (fr < fv[best]) {
            const Point2 xe = along(-2.0);
            const double fe = value(xe);
            if (fe < fr) {
                v[worst] = xe, fv[worst] = fe;
            } else {
                v[worst] = xr, fv[worst] = fr;
            }
        } else if (fr < fv[mid]) {
            v[worst] = xr, fv[worst] = fr;
        } else {
            const Point2 xc = fr < fv[worst] ? along(-0.5) : along(0.5);
            const double fc = value(xc);
            if (fc < std::min(fr, fv[worst])) {
                v[worst] = xc, fv[worst] = fc;
            } else {
                for (int i : {mid, worst}) {
                    v[i] = clamp({(v[i][0] + v[best][0]) / 2, (v[i][1] + v[best][1]) / 2});
                    fv[i] = value(v[i]);
                }
            }
        }
    }
    const int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return {v[best], -fv[best]};
}

}  // namespace

void GpModel::set_data(std::vector<DecisionVector> inputs, std::vector<std::vector<double>> targets) {
    if (inputs.empty()) throw InsufficientDataError("GpModel: no training data");
    const std::size_t n = inputs.size();
    const std::size_t d = inputs.front().size();
    for (const auto& x : inputs) {
        if (x.size() != d) throw UsageError("GpModel: inconsistent input dimensions");
    }
    for (const auto& t : targets) {
        if (t.size() != n) throw UsageError("GpModel: target count does not match input count");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (inputs[a] != inputs[b]) return inputs[a] < inputs[b];
        for (const auto& t : targets) {
            if (t[a] != t[b]) return t[a] < t[b];
        }
        return false;
    });

    dim_ = d;
    inputs_.clear();
    inputs_.reserve(n);
    for (std::size_t i : order) inputs_.push_back(std::move(inputs[i]));
    targets_.assign(targets.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < targets.size(); ++k) {
        for (std::size_t i = 0; i < n; ++i) targets_[k][i] = targets[k][order[i]];
    }

    pair_sq_dist_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        pair_sq_dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
            const double dsq = sq_dist(inputs_[i], j);
            pair_sq_dist_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = dsq;
            pair_sq_dist_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = dsq;
        }
    }
}

double GpModel::sq_dist(std::span<const double> x, std::size_t i) const {
    const auto& xi = inputs_[i];
    double s = 0.0;
    for (std::size_t k = 0; k < dim_; ++k) {
        const double diff = x[k] - xi[k];
        s += diff * diff;
    }
    return s;
}

bool GpModel::factorize(Objective& obj) const {
    const auto& h = obj.hyper;
    const double inv = -0.5 / (h.length_scale * h.length_scale);
    Eigen::MatrixXd k = (pair_sq_dist_.array() * inv).exp().matrix() * h.signal_variance;
    k.diagonal().array() += h.noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) return false;
    obj.chol = llt.matrixL();
    obj.alpha = llt.solve(obj.z);
    return obj.alpha.allFinite();
}

double GpModel::log_marginal_likelihood(std::size_t k, const GpHyperparameters& h) const {
    if (k >= objectives_.size()) throw UsageError("log_marginal_likelihood: objective index out of range");
    Objective tmp;
    tmp.hyper = h;
    tmp.z = objectives_[k].z;
    if (!factorize(tmp)) return kNegInf;
    const double n = static_cast<double>(tmp.z.size());
    const double log_det_half = tmp.chol.diagonal().array().log().sum();
    return -0.5 * tmp.z.dot(tmp.alpha) - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<GpHyperparameters> GpModel::hyperparameters() const {
    std::vector<GpHyperparameters> out;
    for (const auto& o : objectives_) out.push_back(o.hyper);
    return out;
}

std::vector<TargetNormalization> GpModel::normalization() const {
    std::vector<TargetNormalization> out;
    for (const auto& o : objectives_) out.push_back(o.norm);
    return out;
}

GpModel GpModel::from_parameters(std::vector<DecisionVector> inputs, std::vector<std::vector<double>> targets,
                                 std::vector<GpHyperparameters> hyper,
                                 std::vector<TargetNormalization> normalization) {
    if (hyper.size() != targets.size() || normalization.size() != targets.size() || targets.empty()) {
        throw UsageError("GpModel::from_parameters: one hyperparameter set and normalization per objective");
    }
    GpModel model;
    model.set_data(std::move(inputs), std::move(targets));
    const auto n = static_cast<Eigen::Index>(model.inputs_.size());
    for (std::size_t k = 0; k < model.targets_.size(); ++k) {
        if (!(normalization[k].scale > 0.0) || !(hyper[k].length_scale > 0.0) || !(hyper[k].signal_variance > 0.0) ||
            !(hyper[k].noise_variance >= 0.0)) {
            throw UsageError("GpModel::from_parameters: invalid hyperparameters or normalization");
        }
        Objective obj;
        obj.hyper = hyper[k];
        obj.norm = normalization[k];
        obj.z.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            obj.z(i) = (model.targets_[k][static_cast<std::size_t>(i)] - obj.norm.mean) / obj.norm.scale;
        }
        if (!model.factorize(obj)) throw NumericalError("GpModel::from_parameters: Cholesky factorization failed");
        model.objectives_.push_back(std::move(obj));
    }
    return model;
}

void GpModel::check_query(std::span<const double> x) const {
    if (!trained()) throw UsageError("GpModel: predict called on an untrained model");
    if (x.size() != dim_) throw UsageError("GpModel: query dimension mismatch");
}

ObjectiveVector GpModel::predict_mean(std::span<const double> x) const {
    check_query(x);
    const std::size_t n = inputs_.size();
    std::vector<double> dsq(n);
    for (std::size_t i = 0; i < n; ++i) dsq[i] = sq_dist(x, i);
    ObjectiveVector mean(objectives_.size());
    for (std::size_t k = 0; k < objectives_.size(); ++k) {
        const auto& o = objectives_[k];
        const double inv = -0.5 / (o.hyper.length_scale * o.hyper.length_scale);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m += o.hyper.signal_variance * std::exp(dsq[i] * inv) * o.alpha(static_cast<Eigen::Index>(i));
        }
        mean[k] = o.norm.mean + o.norm.scale * m;
    }
    return mean;
}

Prediction GpModel::predict(std::span<const double> x) const {
    check_query(x);
    const std::size_t n = inputs_.size();
    std::vector<double> dsq(n);
    for (std::size_t i = 0; i < n; ++i) dsq[i] = sq_dist(x, i);
    Prediction p;
    p.mean.resize(objectives_.size());
    p.std.resize(objectives_.size());
    Eigen::VectorXd kstar(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < objectives_.size(); ++k) {
        const auto& o = objectives_[k];
        const double inv = -0.5 / (o.hyper.length_scale * o.hyper.length_scale);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double kv = o.hyper.signal_variance * std::exp(dsq[i] * inv);
            kstar(static_cast<Eigen::Index>(i)) = kv;
            m += kv * o.alpha(static_cast<Eigen::Index>(i));
        }
        const Eigen::VectorXd v = o.chol.triangularView<Eigen::Lower>().solve(kstar);
        const double var = std::max(0.0, o.hyper.signal_variance - v.squaredNorm());
        p.mean[k] = o.norm.mean + o.norm.scale * m;
        p.std[k] = o.norm.scale * std::sqrt(var);
    }
    return p;
}

std::vector<Prediction> GpModel::predict_batch(std::span<const DecisionVector> xs) const {
    std::vector<Prediction> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(predict(x));
    return out;
}

GpModel train_gp(std::span<const EvaluatedSolution> data, const GpOptions& options) {
    if (data.size() < 2) throw InsufficientDataError("train_gp: at least 2 evaluated points required");
    const std::size_t m = data.front().objectives.size();
    std::vector<DecisionVector> inputs;
    std::vector<std::vector<double>> targets(m);
    for (const auto& s : data) {
        if (s.objectives.size() != m) throw UsageError("train_gp: inconsistent objective counts");
        inputs.push_back(s.decision);
        for (std::size_t k = 0; k < m; ++k) targets[k].push_back(s.objectives[k]);
    }
    {
        auto sorted = inputs;
        std::sort(sorted.begin(), sorted.end());
        if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 2) {
            throw InsufficientDataError("train_gp: at least 2 distinct decisions required");
        }
    }

    GpModel model;
    model.set_data(std::move(inputs), std::move(targets));
    const std::size_t n = model.inputs_.size();

    // Deterministic Latin-hypercube starts in log hyperparameter space.
    const Point2 lo{std::log(options.length_scale_min), std::log(options.signal_variance_min)};
    const Point2 hi{std::log(options.length_scale_max), std::log(options.signal_variance_max)};
    std::vector<Point2> starts(static_cast<std::size_t>(std::max(1, options.n_starts)));
    {
        std::mt19937_64 rng(options.seed);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int dim = 0; dim < 2; ++dim) {
            std::vector<std::size_t> perm(starts.size());
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            for (std::size_t i = 0; i < starts.size(); ++i) {
                const double u = (static_cast<double>(perm[i]) + unif(rng)) / static_cast<double>(starts.size());
                starts[i][static_cast<std::size_t>(dim)] = lo[dim] + u * (hi[dim] - lo[dim]);
            }
        }
    }

    for (std::size_t k = 0; k < m; ++k) {
        GpModel::Objective obj;
        double mean = 0.0;
        for (double y : model.targets_[k]) mean += y;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double y : model.targets_[k]) var += (y - mean) * (y - mean);
        const double sd = std::sqrt(var / static_cast<double>(n));
        obj.norm = {mean, sd > 1e-12 * std::max(1.0, std::abs(mean)) ? sd : 1.0};
        obj.z.resize(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            obj.z(static_cast<Eigen::Index>(i)) = (model.targets_[k][i] - obj.norm.mean) / obj.norm.scale;
        }
        model.objectives_.push_back(obj);

        // Evaluates at the smallest noise level (floor * 10^r) that factorizes.
        auto lml_at = [&](const Point2& p, double* noise_used) {
            GpHyperparameters h{std::exp(p[0]), std::exp(p[1]), options.noise_floor};
            for (int r = 0; r <= options.cholesky_retries; ++r) {
                const double v = model.log_marginal_likelihood(k, h);
                if (std::isfinite(v)) {
                    if (noise_used) *noise_used = h.noise_variance;
                    return v;
                }
                h.noise_variance *= 10.0;
            }
            return kNegInf;
        };

        GpFitLog log;
        Point2 best_point = starts.front();
        double best_value = kNegInf;
        for (const auto& s : starts) {
            log.start_log_likelihoods.push_back(lml_at(s, nullptr));
            auto [p, v] = nelder_mead_max([&](const Point2& q) { return lml_at(q, nullptr); }, s, lo, hi,
                                          options.max_evaluations_per_start);
            if (v > best_value) best_value = v, best_point = p;
        }
        if (!std::isfinite(best_value)) {
            throw NumericalError("train_gp: Cholesky failed for every hyperparameter candidate");
        }
        double noise = options.noise_floor;
        best_value = lml_at(best_point, &noise);
        log.final_log_likelihood = best_value;

        auto& o = model.objectives_.back();
        o.hyper = {std::exp(best_point[0]), std::exp(best_point[1]), noise};
        if (!model.factorize(o)) throw NumericalError("train_gp: Cholesky failed at the fitted hyperparameters");
        model.fit_log_.push_back(std::move(log));
    }
    return model;
}

}  // namespace seeto

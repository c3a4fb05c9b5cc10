#include "illumine/umap.hpp"

#include "illumine/error.hpp"
#include "illumine/rng.hpp"
#include "illumine/simd/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace illumine {
namespace {

constexpr double kSmoothTolerance = 1e-5;
constexpr double kMinKDistScale = 1e-3;
constexpr double kGradClip = 4.0;

double clip(double v) { return std::clamp(v, -kGradClip, kGradClip); }

}  // namespace

std::array<double, 2> fit_ab(double spread, double min_dist) {
    constexpr int kSamples = 300;
    std::vector<double> xs(kSamples), ys(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        xs[i] = 3.0 * spread * i / (kSamples - 1);
        ys[i] = xs[i] < min_dist ? 1.0 : std::exp(-(xs[i] - min_dist) / spread);
    }
    const auto residual_sum = [&](double a, double b) {
        double s = 0.0;
        for (int i = 0; i < kSamples; ++i) {
            const double f = 1.0 / (1.0 + a * std::pow(xs[i], 2.0 * b));
            s += (f - ys[i]) * (f - ys[i]);
        }
        return s;
    };

    // Levenberg-Marquardt on the two parameters.
    double a = 1.0, b = 1.0, lambda = 1e-3;
    double cost = residual_sum(a, b);
    for (int iter = 0; iter < 500; ++iter) {
        double jtj[2][2] = {{0, 0}, {0, 0}}, jtr[2] = {0, 0};
        for (int i = 0; i < kSamples; ++i) {
            const double x = xs[i];
            const double p = x > 0.0 ? std::pow(x, 2.0 * b) : 0.0;
            const double denom = 1.0 + a * p;
            const double f = 1.0 / denom;
            const double r = f - ys[i];
            const double da = -p / (denom * denom);
            const double db = x > 0.0 ? -a * p * 2.0 * std::log(x) / (denom * denom) : 0.0;
            jtj[0][0] += da * da;
            jtj[0][1] += da * db;
            jtj[1][1] += db * db;
            jtr[0] += da * r;
            jtr[1] += db * r;
        }
        const double m00 = jtj[0][0] * (1.0 + lambda), m11 = jtj[1][1] * (1.0 + lambda), m01 = jtj[0][1];
        const double det = m00 * m11 - m01 * m01;
        if (det == 0.0) break;
        const double step_a = -(m11 * jtr[0] - m01 * jtr[1]) / det;
        const double step_b = -(-m01 * jtr[0] + m00 * jtr[1]) / det;
        const double na = a + step_a, nb = b + step_b;
        const double ncost = na > 0.0 && nb > 0.0 ? residual_sum(na, nb) : std::numeric_limits<double>::infinity();
        if (ncost < cost) {
            const bool converged = cost - ncost < 1e-15 * std::max(1.0, cost);
            a = na;
            b = nb;
            cost = ncost;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (converged) break;
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    return {a, b};
}

FuzzyGraph fuzzy_neighbor_graph(std::span<const double> data, std::size_t n, std::size_t dim,
                                std::size_t n_neighbors) {
    const std::size_t k = std::min(n_neighbors, n - 1);
    std::vector<std::vector<std::pair<double, std::size_t>>> nbrs(n);
    std::vector<double> sq(n);
    double total_mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        simd::squared_distances(data.subspan(i * dim, dim), data, dim, sq);
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) cand.emplace_back(std::sqrt(sq[j]), j);
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        cand.resize(k);
        for (const auto& c : cand) total_mean += c.first;
        nbrs[i] = std::move(cand);
    }
    total_mean /= static_cast<double>(n * k);

    // Per-point bandwidth so the memberships sum to log2(k + 1).
    const double target = std::log2(static_cast<double>(k + 1));
    std::map<std::pair<std::size_t, std::size_t>, double> w;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = nbrs[i];
        double rho = 0.0;
        for (const auto& [d, j] : row)
            if (d > 0.0) {
                rho = d;
                break;
            }
        double lo = 0.0, hi = std::numeric_limits<double>::infinity(), mid = 1.0;
        for (int it = 0; it < 64; ++it) {
            double psum = 0.0;
            for (const auto& [d, j] : row) {
                const double excess = d - rho;
                psum += excess > 0.0 ? std::exp(-excess / mid) : 1.0;
            }
            if (std::abs(psum - target) < kSmoothTolerance) break;
            if (psum > target) {
                hi = mid;
                mid = (lo + hi) / 2.0;
            } else {
                lo = mid;
                mid = std::isinf(hi) ? mid * 2.0 : (lo + hi) / 2.0;
            }
        }
        double mean_i = 0.0;
        for (const auto& [d, j] : row) mean_i += d;
        mean_i /= static_cast<double>(row.size());
        mid = std::max(mid, kMinKDistScale * (rho > 0.0 ? mean_i : total_mean));
        if (mid <= 0.0) mid = kMinKDistScale;

        for (const auto& [d, j] : row) {
            const double excess = d - rho;
            w[{i, j}] = excess > 0.0 ? std::exp(-excess / mid) : 1.0;
        }
    }

    FuzzyGraph g;
    std::map<std::pair<std::size_t, std::size_t>, double> sym;
    for (const auto& [ij, wij] : w) {
        const auto rev = w.find({ij.second, ij.first});
        const double wji = rev == w.end() ? 0.0 : rev->second;
        const double s = wij + wji - wij * wji;
        sym[ij] = s;
        sym[{ij.second, ij.first}] = s;
    }
    for (const auto& [ij, s] : sym) {
        g.head.push_back(ij.first);
        g.tail.push_back(ij.second);
        g.weight.push_back(s);
    }
    return g;
}

std::vector<Point2> umap_embed(std::span<const double> data, std::size_t n, std::size_t dim,
                               const UmapParams& params, std::uint64_t seed) {
    if (n < 2) throw Error(ErrorCode::InvalidArgument, "neighbor embedding needs at least 2 points");
    if (data.size() != n * dim) throw Error(ErrorCode::DimensionMismatch, "data size is not n * dim");

    FuzzyGraph graph = fuzzy_neighbor_graph(data, n, dim, params.n_neighbors);
    const double max_w = *std::max_element(graph.weight.begin(), graph.weight.end());
    const double epochs = static_cast<double>(params.n_epochs);

    std::vector<std::size_t> head, tail;
    std::vector<double> epochs_per_sample;
    for (std::size_t e = 0; e < graph.weight.size(); ++e) {
        if (graph.weight[e] < max_w / epochs) continue;
        head.push_back(graph.head[e]);
        tail.push_back(graph.tail[e]);
        epochs_per_sample.push_back(max_w / graph.weight[e]);
    }

    const auto [a, b] = fit_ab(params.spread, params.min_dist);

    Rng rng(seed);
    std::vector<Point2> y(n);
    for (auto& p : y) p = {rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0)};
    for (int c = 0; c < 2; ++c) {
        double lo = y[0][c], hi = y[0][c];
        for (const auto& p : y) {
            lo = std::min(lo, p[c]);
            hi = std::max(hi, p[c]);
        }
        for (auto& p : y) p[c] = hi > lo ? 10.0 * (p[c] - lo) / (hi - lo) : 0.0;
    }

    const double neg_rate = static_cast<double>(params.negative_sample_rate);
    std::vector<double> epochs_per_negative(epochs_per_sample.size());
    for (std::size_t e = 0; e < epochs_per_sample.size(); ++e) epochs_per_negative[e] = epochs_per_sample[e] / neg_rate;
    std::vector<double> next_sample = epochs_per_sample;
    std::vector<double> next_negative = epochs_per_negative;

    for (std::size_t epoch = 0; epoch < params.n_epochs; ++epoch) {
        const double alpha = params.learning_rate * (1.0 - static_cast<double>(epoch) / epochs);
        const double ep = static_cast<double>(epoch);
        for (std::size_t e = 0; e < head.size(); ++e) {
            if (next_sample[e] > ep) continue;
            auto& cur = y[head[e]];
            auto& other = y[tail[e]];
            double dist_sq = 0.0;
            for (int c = 0; c < 2; ++c) dist_sq += (cur[c] - other[c]) * (cur[c] - other[c]);
            double coeff = 0.0;
            if (dist_sq > 0.0) {
                coeff = -2.0 * a * b * std::pow(dist_sq, b - 1.0);
                coeff /= a * std::pow(dist_sq, b) + 1.0;
            }
            for (int c = 0; c < 2; ++c) {
                const double g = clip(coeff * (cur[c] - other[c]));
                cur[c] += g * alpha;
                other[c] -= g * alpha;
            }
            next_sample[e] += epochs_per_sample[e];

            const auto n_neg = static_cast<std::size_t>((ep - next_negative[e]) / epochs_per_negative[e]);
            for (std::size_t s = 0; s < n_neg; ++s) {
                const std::size_t k = rng.below(n);
                if (k == head[e]) continue;
                const auto& neg = y[k];
                double d2 = 0.0;
                for (int c = 0; c < 2; ++c) d2 += (cur[c] - neg[c]) * (cur[c] - neg[c]);
                double rcoeff = 0.0;
                if (d2 > 0.0) {
                    rcoeff = 2.0 * params.repulsion_strength * b;
                    rcoeff /= (0.001 + d2) * (a * std::pow(d2, b) + 1.0);
                }
                for (int c = 0; c < 2; ++c) {
                    const double g = rcoeff > 0.0 ? clip(rcoeff * (cur[c] - neg[c])) : kGradClip;
                    cur[c] += g * alpha;
                }
            }
            next_negative[e] += static_cast<double>(n_neg) * epochs_per_negative[e];
        }
    }
    return y;
}

std::vector<Point2> pca_2d(std::span<const double> data, std::size_t n, std::size_t dim) {
    if (n == 0) return {};
    if (data.size() != n * dim) throw Error(ErrorCode::DimensionMismatch, "data size is not n * dim");
    std::vector<Point2> out(n, Point2{0.0, 0.0});
    if (n == 1) return out;

    Eigen::MatrixXd x(n, dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < dim; ++j) x(i, j) = data[i * dim + j];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const Eigen::MatrixXd& v = svd.matrixV();
    const auto& sv = svd.singularValues();
    for (int c = 0; c < 2 && c < v.cols(); ++c) {
        if (sv(c) <= 1e-12 * std::max(1.0, sv(0))) continue;  // rank-deficient axis stays at 0
        Eigen::VectorXd axis = v.col(c);
        Eigen::Index arg = 0;
        axis.cwiseAbs().maxCoeff(&arg);
        if (axis(arg) < 0.0) axis = -axis;
        const Eigen::VectorXd proj = x * axis;
        for (std::size_t i = 0; i < n; ++i) out[i][c] = proj(static_cast<Eigen::Index>(i));
    }
    return out;
}

}  // namespace illumine

#include "isym/symmetry_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <json.hpp>

#include "isym/error.hpp"
#include "isym/log.hpp"

namespace isym {

WeightMatrix build_weight_matrix(int k_f, double gaussian_width) {
    if (k_f < 1) throw Error(ErrorCode::InvalidArgument, "weight matrix size must be positive");
    if (!(gaussian_width > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian width must be positive");
    WeightMatrix w;
    w.gaussian_width = gaussian_width;
    w.W.resize(k_f, k_f);
    for (int i = 0; i < k_f; ++i) {
        for (int j = 0; j < k_f; ++j) {
            const double d = i - j;
            w.W(i, j) = 1.0 - std::exp(-d * d / (2.0 * gaussian_width * gaussian_width));
        }
    }
    return w;
}

double default_gaussian_width(int k_f) { return k_f / 10.0; }

double symmetry_score(const Eigen::MatrixXd& C, const WeightMatrix& W) {
    if (C.rows() != W.W.rows() || C.cols() != W.W.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "map and weight matrix differ in size");
    }
    const Eigen::MatrixXd energy = C.array().square().matrix();
    const double total = energy.sum();
    if (total == 0.0) {
        warn("symmetry_score: all-zero map scored as 0");
        return 0.0;
    }
    return (W.W.array() * energy.array()).sum() / total;
}

double symmetry_distance(const SymmetryRecord& a, const SymmetryRecord& b) { return std::abs(a.score - b.score); }

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Lloyd {
    Eigen::MatrixXd centroids;
    std::vector<int> labels;
    double inertia = 0.0;
    int iterations = 0;
};

int nearest(const Eigen::MatrixXd& centroids, const Eigen::RowVectorXd& x, double* dist) {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        const double d = (centroids.row(c) - x).squaredNorm();
        if (d < bd) {
            bd = d;
            best = static_cast<int>(c);
        }
    }
    if (dist) *dist = bd;
    return best;
}

Eigen::MatrixXd seed_plus_plus(const Eigen::MatrixXd& x, int k, std::mt19937_64& rng) {
    const Eigen::Index n = x.rows();
    Eigen::MatrixXd c(k, x.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    Eigen::Index first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    c.row(0) = x.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (int j = 1; j < k; ++j) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int q = 0; q < j; ++q) best = std::min(best, (x.row(i) - c.row(q)).squaredNorm());
            d2[static_cast<std::size_t>(i)] = best;
            total += best;
        }
        Eigen::Index pick = -1;
        if (total > 0.0) {
            const double u = uniform01(rng) * total;
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += d2[static_cast<std::size_t>(i)];
                if (d2[static_cast<std::size_t>(i)] > 0.0 && u < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {
                for (Eigen::Index i = n - 1; i >= 0; --i) {
                    if (d2[static_cast<std::size_t>(i)] > 0.0) {
                        pick = i;
                        break;
                    }
                }
            }
        } else {
            for (Eigen::Index i = 0; i < n && pick < 0; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) pick = i;
            }
        }
        chosen[static_cast<std::size_t>(pick)] = 1;
        c.row(j) = x.row(pick);
    }
    return c;
}

Lloyd run_lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, const ClusterOptions& opt) {
    const Eigen::Index n = x.rows();
    const int k = static_cast<int>(centroids.rows());
    Lloyd out;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        out.iterations = it;
        std::vector<double> dist(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            out.labels[static_cast<std::size_t>(i)] = nearest(centroids, x.row(i), &dist[static_cast<std::size_t>(i)]);
        }
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, x.cols());
        std::vector<int> count(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            next.row(out.labels[static_cast<std::size_t>(i)]) += x.row(i);
            ++count[static_cast<std::size_t>(out.labels[static_cast<std::size_t>(i)])];
        }
        for (int c = 0; c < k; ++c) {
            if (count[static_cast<std::size_t>(c)] > 0) {
                next.row(c) /= count[static_cast<std::size_t>(c)];
                continue;
            }
            // Empty cluster: move it to the worst-served point.
            const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
            next.row(c) = x.row(far);
            dist[static_cast<std::size_t>(far)] = 0.0;
        }
        const double moved = (next - centroids).rowwise().norm().maxCoeff();
        centroids = std::move(next);
        if (moved <= opt.tolerance) break;
    }
    out.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double d = 0.0;
        out.labels[static_cast<std::size_t>(i)] = nearest(centroids, x.row(i), &d);
        out.inertia += d;
    }
    out.centroids = std::move(centroids);
    return out;
}

Eigen::MatrixXd flatten(const std::vector<Eigen::MatrixXd>& maps) {
    const Eigen::Index r = maps.front().rows();
    const Eigen::Index c = maps.front().cols();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(maps.size()), r * c);
    for (std::size_t m = 0; m < maps.size(); ++m) {
        if (maps[m].rows() != r || maps[m].cols() != c) {
            throw Error(ErrorCode::DimensionMismatch, "maps differ in size");
        }
        for (Eigen::Index i = 0; i < r; ++i) {
            for (Eigen::Index j = 0; j < c; ++j) x(static_cast<Eigen::Index>(m), i * c + j) = maps[m](i, j);
        }
    }
    return x;
}

}  // namespace

ClusterResult cluster_maps(const std::vector<Eigen::MatrixXd>& maps, const WeightMatrix& W,
                           const ClusterOptions& options) {
    if (options.k_groups < 1) throw Error(ErrorCode::InvalidArgument, "k_groups must be positive");
    if (static_cast<int>(maps.size()) < options.k_groups) {
        throw Error(ErrorCode::TooFewMaps, std::to_string(maps.size()) + " maps for " +
                                               std::to_string(options.k_groups) + " groups");
    }
    const Eigen::MatrixXd x = flatten(maps);
    const Eigen::Index kf = maps.front().rows();
    std::mt19937_64 rng(options.seed);
    Lloyd best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Lloyd l = run_lloyd(x, seed_plus_plus(x, options.k_groups, rng), options);
        if (l.inertia < best.inertia) best = std::move(l);
    }

    const int k = options.k_groups;
    std::vector<double> score(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        const Eigen::RowVectorXd flat = best.centroids.row(c);
        const Eigen::MatrixXd cm =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(flat.data(), kf, kf);
        score[static_cast<std::size_t>(c)] = symmetry_score(cm, W);
    }
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return score[a] < score[b]; });
    std::vector<int> relabel(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) relabel[static_cast<std::size_t>(order[i])] = i;

    ClusterResult out;
    out.inertia = best.inertia;
    out.iterations = best.iterations;
    out.centroids.resize(k, x.cols());
    for (int i = 0; i < k; ++i) {
        out.centroids.row(i) = best.centroids.row(order[i]);
        out.centroid_scores.push_back(score[static_cast<std::size_t>(order[i])]);
    }
    for (std::size_t m = 0; m < maps.size(); ++m) {
        SymmetryRecord rec;
        rec.map_id = static_cast<int>(m);
        rec.score = symmetry_score(maps[m], W);
        rec.cluster_label = relabel[static_cast<std::size_t>(best.labels[m])];
        out.records.push_back(rec);
    }
    return out;
}

double silhouette(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (labels.size() != n) throw Error(ErrorCode::LengthMismatch, "one label per point required");
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<int> size(static_cast<std::size_t>(k), 0);
    for (int l : labels) ++size[static_cast<std::size_t>(l)];
    if (std::count_if(size.begin(), size.end(), [](int s) { return s > 0; }) < 2) return 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> sum(static_cast<std::size_t>(k), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) sum[static_cast<std::size_t>(labels[j])] += (points.row(i) - points.row(j)).norm();
        }
        const int own = labels[i];
        if (size[static_cast<std::size_t>(own)] <= 1) continue;  // singleton: silhouette 0
        const double a = sum[static_cast<std::size_t>(own)] / (size[static_cast<std::size_t>(own)] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
            if (c != own && size[static_cast<std::size_t>(c)] > 0) {
                b = std::min(b, sum[static_cast<std::size_t>(c)] / size[static_cast<std::size_t>(c)]);
            }
        }
        const double m = std::max(a, b);
        if (m > 0.0) total += (b - a) / m;
    }
    return total / static_cast<double>(n);
}

ClusterResult cluster_maps_auto(const std::vector<Eigen::MatrixXd>& maps, const WeightMatrix& W,
                                ClusterOptions options, std::vector<std::pair<int, double>>* sweep) {
    if (maps.size() < 3) throw Error(ErrorCode::TooFewMaps, "silhouette sweep needs at least three maps");
    const Eigen::MatrixXd x = flatten(maps);
    const int top = std::min<int>(8, static_cast<int>(maps.size()) - 1);
    ClusterResult best;
    double best_s = -std::numeric_limits<double>::infinity();
    for (int k = 2; k <= top; ++k) {
        options.k_groups = k;
        ClusterResult r = cluster_maps(maps, W, options);
        std::vector<int> labels;
        for (const auto& rec : r.records) labels.push_back(*rec.cluster_label);
        const double s = silhouette(x, labels);
        if (sweep) sweep->push_back({k, s});
        if (s > best_s) {
            best_s = s;
            best = std::move(r);
        }
    }
    return best;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw Error(ErrorCode::LengthMismatch, "labelings differ in length");
    const auto n = static_cast<double>(a.size());
    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> ra, rb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1;
        ra[a[i]] += 1;
        rb[b[i]] += 1;
    }
    const auto c2 = [](double x) { return x * (x - 1) / 2; };
    double idx = 0, sa = 0, sb = 0;
    for (const auto& [k, v] : joint) idx += c2(v);
    for (const auto& [k, v] : ra) sa += c2(v);
    for (const auto& [k, v] : rb) sb += c2(v);
    const double expected = n > 1 ? sa * sb / c2(n) : 0.0;
    const double max_idx = 0.5 * (sa + sb);
    if (max_idx == expected) return 1.0;  // both labelings trivial and identical in structure
    return (idx - expected) / (max_idx - expected);
}

std::string scores_csv(const std::vector<SymmetryRecord>& records) {
    std::string out = "map_id,score,cluster_label\n";
    char buf[96];
    for (const auto& r : records) {
        if (r.cluster_label) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%d\n", r.map_id, r.score, *r.cluster_label);
        } else {
            std::snprintf(buf, sizeof buf, "%d,%.17g,\n", r.map_id, r.score);
        }
        out += buf;
    }
    return out;
}

std::string clusters_json(const ClusterResult& result) {
    nlohmann::ordered_json j;
    j["k_groups"] = result.centroids.rows();
    j["inertia"] = result.inertia;
    j["iterations"] = result.iterations;
    nlohmann::ordered_json groups = nlohmann::ordered_json::array();
    for (Eigen::Index c = 0; c < result.centroids.rows(); ++c) {
        std::vector<int> members;
        for (const auto& r : result.records) {
            if (r.cluster_label && *r.cluster_label == c) members.push_back(r.map_id);
        }
        const Eigen::RowVectorXd row = result.centroids.row(c);
        groups.push_back({{"label", c},
                          {"centroid_score", result.centroid_scores[static_cast<std::size_t>(c)]},
                          {"members", members},
                          {"centroid", std::vector<double>(row.data(), row.data() + row.size())}});
    }
    j["groups"] = groups;
    return j.dump(1) + "\n";
}

}  // namespace isym

#include "isym/fmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <json.hpp>

#include "isym/error.hpp"
#include "isym/kernels.hpp"

namespace isym {

DistanceRows::DistanceRows(const BiharmonicTable& table, const BiharmonicEmbedding* embedding)
    : table_(&table), embedding_(embedding), diameter_(table.diameter()) {}

std::vector<double> DistanceRows::row(int vertex) const {
    const int i = table_->index_of(vertex);
    if (i >= 0 && table_->full_rows.rows() > 0) {
        const auto r = table_->full_rows.row(i);
        return {r.data(), r.data() + r.size()};
    }
    if (embedding_) return embedding_->distances_from(vertex);
    throw Error(ErrorCode::InvalidArgument, "no distance row for vertex " + std::to_string(vertex));
}

Regions extract_regions(const std::vector<VotedPair>& cluster, const DistanceRows& rows, double radius) {
    if (cluster.empty()) throw Error(ErrorCode::EmptyRegion, "cannot build regions from an empty cluster");
    if (!(radius > 0.0 && radius <= 1.0)) throw Error(ErrorCode::InvalidArgument, "region radius must lie in (0, 1]");
    const double r = radius * rows.diameter();
    std::vector<char> in_src, in_dst;
    const auto grow = [&](std::vector<char>& mask, int center) {
        const std::vector<double> d = rows.row(center);
        if (mask.empty()) mask.assign(d.size(), 0);
        for (std::size_t v = 0; v < d.size(); ++v) {
            if (d[v] <= r) mask[v] = 1;
        }
        mask[static_cast<std::size_t>(center)] = 1;
    };
    for (const VotedPair& p : cluster) {
        grow(in_src, p.source);
        grow(in_dst, p.destination);
    }
    Regions out;
    for (std::size_t v = 0; v < in_src.size(); ++v) {
        if (in_src[v]) out.source.push_back(static_cast<int>(v));
        if (in_dst[v]) out.destination.push_back(static_cast<int>(v));
    }
    return out;
}

Eigen::MatrixXd solve_functional_map(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                     const Eigen::VectorXd& eigenvalues, double mu, double rank_tolerance) {
    const Eigen::Index k = a.rows();
    if (b.rows() != k || b.cols() != a.cols() || eigenvalues.size() != k) {
        throw Error(ErrorCode::DimensionMismatch, "constraint matrices disagree in shape");
    }
    if (a.cols() < k) {
        throw Error(ErrorCode::RankDeficient, std::to_string(a.cols()) + " constraints for a " + std::to_string(k) +
                                                  "x" + std::to_string(k) + " map");
    }
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const Eigen::VectorXd sv = svd.singularValues();
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > rank_tolerance * sv(0)) ++rank;
    }
    if (rank < k) {
        throw Error(ErrorCode::RankDeficient, "constraint rank " + std::to_string(rank) + " below " +
                                                  std::to_string(k) + " from " + std::to_string(a.cols()) +
                                                  " constraints");
    }
    const double top = std::max(std::abs(eigenvalues(k - 1)), std::numeric_limits<double>::min());
    const Eigen::VectorXd lam = eigenvalues / top;
    const Eigen::MatrixXd gram = a * a.transpose();
    const Eigen::MatrixXd rhs = a * b.transpose();  // column i solves for row i of C
    Eigen::MatrixXd c(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Eigen::MatrixXd sys = gram;
        for (Eigen::Index j = 0; j < k; ++j) {
            const double d = lam(i) - lam(j);
            sys(j, j) += mu * d * d;
        }
        c.row(i) = sys.ldlt().solve(rhs.col(i)).transpose();
    }
    return c;
}

namespace {

Eigen::VectorXd masked(const std::vector<int>& region, std::size_t nv, const auto& value) {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
    for (int v : region) f(v) = value(v);
    return f;
}

Eigen::VectorXd coefficients(const SpectralBasis& basis, const Eigen::VectorXd& f, int k_f) {
    return basis.eigenvectors.leftCols(k_f).transpose() * basis.masses.cwiseProduct(f);
}

}  // namespace

FunctionalMap estimate_map(const SpectralBasis& basis, const WksField& wks, const std::vector<VotedPair>& seeds,
                           const Regions& regions, const DistanceRows& rows, const MapOptions& options) {
    const int k_f = options.basis_size;
    if (seeds.empty()) throw Error(ErrorCode::InvalidArgument, "map estimation needs at least one seed pair");
    if (k_f < 1 || k_f > basis.size()) {
        throw Error(ErrorCode::DimensionMismatch, "map size " + std::to_string(k_f) + " exceeds basis size " +
                                                      std::to_string(basis.size()));
    }
    if (regions.source.empty() || regions.destination.empty()) {
        throw Error(ErrorCode::EmptyRegion, "map estimation needs nonempty regions");
    }
    const std::size_t nv = basis.vertex_count();
    const int bands = wks.bands();
    const int m = bands + static_cast<int>(seeds.size());
    Eigen::MatrixXd a(k_f, m), b(k_f, m);
    for (int j = 0; j < bands; ++j) {
        const auto band = [&](int v) { return wks.signatures(v, j); };
        a.col(j) = coefficients(basis, masked(regions.source, nv, band), k_f);
        b.col(j) = coefficients(basis, masked(regions.destination, nv, band), k_f);
    }
    const double width = options.bump_width * rows.diameter();
    const auto bump = [&](int center) {
        const std::vector<double> d = rows.row(center);
        Eigen::VectorXd f(static_cast<Eigen::Index>(nv));
        for (std::size_t v = 0; v < nv; ++v) f(v) = std::exp(-0.5 * d[v] * d[v] / (width * width));
        return f;
    };
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        a.col(bands + s) = coefficients(basis, bump(seeds[s].source), k_f);
        b.col(bands + s) = coefficients(basis, bump(seeds[s].destination), k_f);
    }
    for (int c = 0; c < m; ++c) {
        const double n = a.col(c).norm();
        if (n > 0.0) {
            a.col(c) /= n;
            b.col(c) /= n;
        }
    }

    FunctionalMap map;
    map.C = solve_functional_map(a, b, basis.eigenvalues.head(k_f), options.regularizer, options.rank_tolerance);
    map.basis_size = k_f;
    map.seed_pairs = seeds;
    map.region_source = regions.source;
    map.region_destination = regions.destination;
    return map;
}

Eigen::MatrixXd pointwise_to_functional(const SpectralBasis& basis, const std::vector<int>& target, int k_f) {
    if (target.size() != basis.vertex_count()) throw Error(ErrorCode::LengthMismatch, "map length differs from V");
    if (k_f < 1 || k_f > basis.size()) throw Error(ErrorCode::DimensionMismatch, "map size exceeds basis size");
    const auto phi = basis.eigenvectors.leftCols(k_f);
    Eigen::MatrixXd pulled(phi.rows(), k_f);  // (Pi Phi)(v) = Phi(target[v])
    for (std::size_t v = 0; v < target.size(); ++v) pulled.row(static_cast<Eigen::Index>(v)) = phi.row(target[v]);
    // A function f on the source becomes g with g(target[v]) = f(v); its
    // coefficients are Phi^T M g, approximated by pulling back through Pi.
    return pulled.transpose() * basis.masses.asDiagonal() * phi;
}

Correspondence recover_correspondence(const FunctionalMap& map, const SpectralBasis& basis) {
    const int k_f = map.basis_size;
    if (map.C.rows() != k_f || map.C.cols() != k_f || k_f > basis.size()) {
        throw Error(ErrorCode::DimensionMismatch, "map does not fit the basis");
    }
    if (map.region_destination.empty()) throw Error(ErrorCode::EmptyRegion, "empty destination region");
    const std::size_t stride = (static_cast<std::size_t>(k_f) + 3) / 4 * 4;
    const std::size_t nd = map.region_destination.size();
    std::vector<double> dst(nd * stride, 0.0);
    for (std::size_t r = 0; r < nd; ++r) {
        for (int i = 0; i < k_f; ++i) dst[r * stride + i] = basis.eigenvectors(map.region_destination[r], i);
    }
    const auto& kern = kernels::active();
    const int ns = static_cast<int>(map.region_source.size());
    Correspondence out;
    out.pairs.resize(ns);
    out.residuals.resize(ns);
#pragma omp parallel
    {
        std::vector<double> query(stride, 0.0), dist(nd);
#pragma omp for schedule(static)
        for (int s = 0; s < ns; ++s) {
            const int v = map.region_source[s];
            const Eigen::VectorXd mapped = map.C * basis.eigenvectors.row(v).head(k_f).transpose();
            for (int i = 0; i < k_f; ++i) query[i] = mapped(i);
            kern.squared_distance_rows(query.data(), dst.data(), nd, stride, stride, dist.data());
            std::size_t best = 0;
            for (std::size_t r = 1; r < nd; ++r) {
                if (dist[r] < dist[best]) best = r;
            }
            out.pairs[s] = {v, map.region_destination[best]};
            out.residuals[s] = std::sqrt(dist[best]);
        }
    }
    return out;
}

std::vector<VotedPair> resolve_flip(const std::vector<VotedPair>& pairs, const DistanceRows& rows, int anchor) {
    const std::vector<double> d = rows.row(anchor);
    std::vector<VotedPair> out = pairs;
    for (VotedPair& p : out) {
        const double ds = d.at(static_cast<std::size_t>(p.source));
        const double dd = d.at(static_cast<std::size_t>(p.destination));
        if (dd < ds || (dd == ds && p.destination < p.source)) std::swap(p.source, p.destination);
    }
    return out;
}

std::vector<std::vector<VotedPair>> cluster_seed_pairs(const std::vector<VotedPair>& pairs,
                                                       const BiharmonicTable& table, double eps) {
    std::vector<std::vector<VotedPair>> clusters;
    for (const VotedPair& p : pairs) {
        bool placed = false;
        for (auto& c : clusters) {
            const bool agrees = std::all_of(c.begin(), c.end(), [&](const VotedPair& q) {
                return distance_vote(p.source, p.destination, q.source, q.destination, table, eps) &&
                       distance_vote(q.source, q.destination, p.source, p.destination, table, eps);
            });
            if (agrees) {
                c.push_back(p);
                placed = true;
                break;
            }
        }
        if (!placed) clusters.push_back({p});
    }
    return clusters;
}

std::string functional_map_json(const FunctionalMap& map) {
    nlohmann::ordered_json j;
    j["rows"] = map.C.rows();
    j["cols"] = map.C.cols();
    std::vector<double> coeffs;
    coeffs.reserve(static_cast<std::size_t>(map.C.size()));
    for (Eigen::Index r = 0; r < map.C.rows(); ++r) {
        for (Eigen::Index c = 0; c < map.C.cols(); ++c) coeffs.push_back(map.C(r, c));
    }
    j["coefficients"] = coeffs;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::array();
    for (const VotedPair& p : map.seed_pairs) {
        seeds.push_back({{"source", p.source},
                         {"destination", p.destination},
                         {"votes", p.votes},
                         {"support_ratio", p.support_ratio}});
    }
    j["seed_pairs"] = seeds;
    j["region_source"] = map.region_source;
    j["region_destination"] = map.region_destination;
    return j.dump(1) + "\n";
}

FunctionalMap functional_map_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        FunctionalMap map;
        const auto rows = j.at("rows").get<Eigen::Index>();
        const auto cols = j.at("cols").get<Eigen::Index>();
        const auto coeffs = j.at("coefficients").get<std::vector<double>>();
        if (rows != cols || static_cast<std::size_t>(rows * cols) != coeffs.size()) {
            throw Error(ErrorCode::DimensionMismatch, "coefficient count does not match the map shape");
        }
        map.C.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) map.C(r, c) = coeffs[static_cast<std::size_t>(r * cols + c)];
        }
        map.basis_size = static_cast<int>(rows);
        for (const auto& s : j.at("seed_pairs")) {
            VotedPair p;
            p.source = s.at("source").get<int>();
            p.destination = s.at("destination").get<int>();
            p.votes = s.value("votes", 0);
            p.support_ratio = s.value("support_ratio", 0.0);
            map.seed_pairs.push_back(p);
        }
        map.region_source = j.at("region_source").get<std::vector<int>>();
        map.region_destination = j.at("region_destination").get<std::vector<int>>();
        return map;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("bad functional map JSON: ") + e.what());
    }
}

std::string correspondence_json(const Correspondence& corr) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
    for (const auto& [s, d] : corr.pairs) pairs.push_back({s, d});
    j["pairs"] = pairs;
    j["residuals"] = corr.residuals;
    return j.dump() + "\n";
}

}  // namespace isym

#include "isym/voting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "isym/error.hpp"
#include "isym/kernels.hpp"

namespace isym {

namespace {

std::vector<double> all_gaps(const std::vector<int>& samples, const WksField& wks) {
    std::vector<double> gaps;
    gaps.reserve(samples.size() * (samples.size() - 1) / 2);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) gaps.push_back(wks_distance(wks, samples[i], samples[j]));
    }
    return gaps;
}

int table_index(const BiharmonicTable& table, int vertex) {
    const int i = table.index_of(vertex);
    if (i < 0) throw Error(ErrorCode::InvalidArgument, "vertex " + std::to_string(vertex) + " is not a sample");
    return i;
}

bool vote_within(const Eigen::MatrixXd& d, int x, int xp, int y, int yp, double tol) {
    const auto agrees = [&](int u, int up) {
        return std::abs(d(x, u) - d(xp, up)) <= tol && std::abs(d(x, up) - d(u, xp)) <= tol;
    };
    return agrees(y, yp) || agrees(yp, y);
}

}  // namespace

double resolve_threshold(const std::vector<int>& samples, const WksField& wks, const WksThreshold& threshold) {
    if (threshold.kind == WksThreshold::Kind::Absolute) return threshold.value;
    if (!(threshold.value > 0.0 && threshold.value <= 100.0)) {
        throw Error(ErrorCode::InvalidArgument, "WKS percentile must lie in (0, 100]");
    }
    if (samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
    std::vector<double> gaps = all_gaps(samples, wks);
    std::sort(gaps.begin(), gaps.end());
    const auto rank = static_cast<std::size_t>(std::ceil(threshold.value / 100.0 * static_cast<double>(gaps.size())));
    return gaps[std::clamp<std::size_t>(rank, 1, gaps.size()) - 1];
}

std::vector<CandidatePair> generate_good_voters(const std::vector<int>& samples, const WksField& wks,
                                                double t_wks) {
    if (samples.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");
    std::vector<CandidatePair> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = i + 1; j < samples.size(); ++j) {
            const double gap = wks_distance(wks, samples[i], samples[j]);
            if (gap <= t_wks) {
                out.push_back({std::min(samples[i], samples[j]), std::max(samples[i], samples[j]), gap});
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CandidatePair& p, const CandidatePair& q) { return p.a != q.a ? p.a < q.a : p.b < q.b; });
    return out;
}

std::vector<CandidatePair> generate_good_voters(const SampleSet& samples, const WksField& wks,
                                                const WksThreshold& threshold) {
    return generate_good_voters(samples.vertex_ids, wks, resolve_threshold(samples.vertex_ids, wks, threshold));
}

std::vector<CandidatePair> find_wks_twins(const TriangleMesh& mesh, const BiharmonicEmbedding& embedding,
                                          const WksField& wks, const std::vector<int>& samples, double t_wks,
                                          double exclusion_radius, int max_twins) {
    if (max_twins < 1) throw Error(ErrorCode::InvalidArgument, "max_twins must be positive");
    const int nv = static_cast<int>(mesh.vertex_count());
    if (static_cast<std::size_t>(nv) != embedding.vertex_count() || wks.signatures.rows() != nv) {
        throw Error(ErrorCode::LengthMismatch, "mesh, embedding and WKS disagree on vertex count");
    }
    const auto& k = kernels::active();
    const auto bands = static_cast<std::size_t>(wks.signatures.cols());
    std::vector<std::vector<CandidatePair>> found(samples.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < static_cast<int>(samples.size()); ++s) {
        const int a = samples[s];
        std::vector<double> gap(nv);
        k.squared_distance_rows(wks.signatures.row(a).data(), wks.signatures.data(), nv, bands, bands, gap.data());
        const std::vector<double> dist = embedding.distances_from(a);
        std::vector<CandidatePair>& out = found[s];
        for (int v = 0; v < nv; ++v) {
            if (gap[v] > t_wks || dist[v] <= exclusion_radius) continue;
            bool minimum = true;
            for (int u : mesh.neighbors(v)) {
                if (gap[u] < gap[v] || (gap[u] == gap[v] && u < v)) {
                    minimum = false;
                    break;
                }
            }
            if (minimum) out.push_back({a, v, gap[v]});
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const CandidatePair& p, const CandidatePair& q) { return p.wks_gap < q.wks_gap; });
        if (out.size() > static_cast<std::size_t>(max_twins)) out.resize(max_twins);
    }
    std::vector<CandidatePair> pairs;
    std::set<std::pair<int, int>> seen;
    for (const auto& list : found) {
        for (const CandidatePair& p : list) {
            if (seen.count({p.b, p.a}) || !seen.insert({p.a, p.b}).second) continue;
            pairs.push_back(p);
        }
    }
    return pairs;
}

std::vector<int> with_pair_endpoints(const std::vector<int>& samples, const std::vector<CandidatePair>& pairs) {
    std::vector<int> out = samples;
    std::set<int> have(samples.begin(), samples.end());
    for (const CandidatePair& p : pairs) {
        if (have.insert(p.a).second) out.push_back(p.a);
        if (have.insert(p.b).second) out.push_back(p.b);
    }
    return out;
}

bool distance_vote_indexed(int x, int xp, int y, int yp, const BiharmonicTable& table, double eps) {
    return vote_within(table.distances, x, xp, y, yp, eps * table.diameter());
}

bool distance_vote(int x, int x_prime, int y, int y_prime, const BiharmonicTable& table, double eps) {
    return distance_vote_indexed(table_index(table, x), table_index(table, x_prime), table_index(table, y),
                                 table_index(table, y_prime), table, eps);
}

std::vector<VotedPair> run_voting(const std::vector<CandidatePair>& candidates, const BiharmonicTable& table,
                                  double eps, double min_support) {
    if (candidates.empty()) throw Error(ErrorCode::InvalidArgument, "no candidates to vote on");
    if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
    const int p = static_cast<int>(candidates.size());
    std::vector<int> ia(p), ib(p);
    for (int c = 0; c < p; ++c) {
        ia[c] = table_index(table, candidates[c].a);
        ib[c] = table_index(table, candidates[c].b);
    }
    const double tol = eps * table.diameter();
    std::vector<VotedPair> all(p);
#pragma omp parallel for schedule(dynamic, 4)
    for (int c = 0; c < p; ++c) {
        VotedPair& vp = all[c];
        vp.source = candidates[c].a;
        vp.destination = candidates[c].b;
        int eligible = 0;
        for (int o = 0; o < p; ++o) {
            if (o == c) continue;
            const bool same = ia[o] == ia[c] && ib[o] == ib[c];
            const bool reverse = ia[o] == ib[c] && ib[o] == ia[c];
            if (same || reverse) continue;
            ++eligible;
            if (vote_within(table.distances, ia[c], ib[c], ia[o], ib[o], tol)) vp.supporting_pairs.push_back(o);
        }
        vp.votes = static_cast<int>(vp.supporting_pairs.size());
        vp.support_ratio = eligible > 0 ? static_cast<double>(vp.votes) / eligible : 0.0;
    }

    std::vector<int> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int u, int v) { return all[u].support_ratio > all[v].support_ratio; });
    std::vector<VotedPair> out;
    for (int c : order) {
        if (all[c].support_ratio >= min_support) out.push_back(std::move(all[c]));
    }
    return out;
}

std::string voted_pairs_json(const std::vector<VotedPair>& pairs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const VotedPair& p : pairs) {
        arr.push_back({{"source", p.source},
                       {"destination", p.destination},
                       {"votes", p.votes},
                       {"support_ratio", p.support_ratio},
                       {"supporting_pairs", p.supporting_pairs}});
    }
    return arr.dump(2) + "\n";
}

}  // namespace isym

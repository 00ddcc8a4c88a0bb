#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <tuple>

#include "isym/descriptors.hpp"
#include "isym/primitives.hpp"
#include "isym/spectral.hpp"

namespace isym::testing {

// Fixture plus its spectral data, computed once per test binary.
struct Prepared {
    Fixture fixture;
    LaplacianPair laplacian;
    SpectralBasis basis;
    std::unique_ptr<BiharmonicEmbedding> embedding;
    WksField wks;

    const TriangleMesh& mesh() const { return fixture.mesh; }
};

inline const Prepared& prepared(const std::string& name, int subdivisions, int k = 0) {
    static std::map<std::tuple<std::string, int, int>, std::unique_ptr<Prepared>> memo;
    auto& slot = memo[{name, subdivisions, k}];
    if (!slot) {
        auto p = std::make_unique<Prepared>(Prepared{*fixture_by_name(name, subdivisions), {}, {}, nullptr, {}});
        p->laplacian = build_laplacian(p->fixture.mesh);
        const int kk = k > 0 ? k : default_basis_size(p->fixture.mesh.vertex_count());
        p->basis = compute_eigenbasis(p->laplacian, kk);
        p->embedding = std::make_unique<BiharmonicEmbedding>(p->basis);
        p->wks = compute_wks(p->basis);
        slot = std::move(p);
    }
    return *slot;
}

// FPS samples closed under the first fixture symmetry, fixed points dropped.
inline std::vector<int> mirror_closed(const Prepared& p, int base_count, std::uint64_t seed = 42) {
    const auto& perm = p.fixture.symmetries[0].permutation;
    const SampleSet s = farthest_point_sample(*p.embedding, base_count * 3, seed);
    std::vector<int> out;
    for (int v : s.vertex_ids) {
        if (static_cast<int>(out.size()) >= 2 * base_count) break;
        if (perm[v] == v || std::find(out.begin(), out.end(), v) != out.end()) continue;
        out.push_back(v);
        out.push_back(perm[v]);
    }
    return out;
}

}  // namespace isym::testing

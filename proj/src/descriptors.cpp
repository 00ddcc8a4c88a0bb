#include "isym/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

#include "isym/error.hpp"
#include "isym/kernels.hpp"

namespace isym {

namespace {

constexpr char kMatrixMagic[8] = {'I', 'S', 'Y', 'M', 'M', 'X', '0', '1'};
constexpr int kWksChunk = 256;

void check_vertex(std::size_t nv, int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv) {
        throw Error(ErrorCode::InvalidArgument, "vertex id " + std::to_string(v) + " out of range");
    }
}

}  // namespace

BiharmonicEmbedding::BiharmonicEmbedding(const SpectralBasis& basis)
    : vertex_count_(basis.vertex_count()), dims_(basis.size() > 0 ? basis.size() - 1 : 0) {
    if (basis.size() < 2) throw Error(ErrorCode::InvalidArgument, "basis needs at least two eigenpairs");
    stride_ = (dims_ + 3) / 4 * 4;
    for (int i = 1; i < basis.size(); ++i) {
        if (basis.eigenvalues(i) == 0.0) {
            throw Error(ErrorCode::ZeroEigenvalueDivision,
                        "eigenvalue " + std::to_string(i + 1) + " is zero; mesh may be disconnected");
        }
    }
    data_.assign(vertex_count_ * stride_, 0.0);
    for (std::size_t v = 0; v < vertex_count_; ++v) {
        double* r = data_.data() + v * stride_;
        for (std::size_t i = 0; i < dims_; ++i) {
            const auto c = static_cast<Eigen::Index>(i + 1);
            r[i] = basis.eigenvectors(static_cast<Eigen::Index>(v), c) / basis.eigenvalues(c);
        }
    }
}

double BiharmonicEmbedding::squared_distance(int x, int y) const {
    check_vertex(vertex_count_, x);
    check_vertex(vertex_count_, y);
    return kernels::active().squared_distance(row(x), row(y), stride_);
}

double BiharmonicEmbedding::distance(int x, int y) const { return std::sqrt(squared_distance(x, y)); }

void BiharmonicEmbedding::distances_from(int x, std::span<double> out) const {
    check_vertex(vertex_count_, x);
    if (out.size() != vertex_count_) throw Error(ErrorCode::LengthMismatch, "output span has wrong length");
    kernels::active().squared_distance_rows(row(x), data_.data(), vertex_count_, stride_, stride_, out.data());
    for (double& d : out) d = std::sqrt(d);
}

std::vector<double> BiharmonicEmbedding::distances_from(int x) const {
    std::vector<double> out(vertex_count_);
    distances_from(x, out);
    return out;
}

double biharmonic_distance(const SpectralBasis& basis, int x, int y) {
    check_vertex(basis.vertex_count(), x);
    check_vertex(basis.vertex_count(), y);
    double s = 0.0;
    for (int i = 1; i < basis.size(); ++i) {
        const double lambda = basis.eigenvalues(i);
        if (lambda == 0.0) throw Error(ErrorCode::ZeroEigenvalueDivision, "zero non-constant eigenvalue");
        const double d = basis.eigenvectors(x, i) - basis.eigenvectors(y, i);
        s += d * d / (lambda * lambda);
    }
    return std::sqrt(s);
}

SampleSet farthest_point_sample(const BiharmonicEmbedding& embedding, int count, std::uint64_t seed) {
    const std::size_t nv = embedding.vertex_count();
    if (count < 1 || static_cast<std::size_t>(count) > nv) {
        throw Error(ErrorCode::InvalidArgument, "sample count must lie in [1, V]");
    }
    const auto& k = kernels::active();
    const std::size_t stride = (embedding.dimension() + 3) / 4 * 4;
    const double* base = embedding.row(0);

    std::mt19937_64 rng(seed);
    int current = static_cast<int>(rng() % nv);

    SampleSet out;
    std::vector<double> running(nv, std::numeric_limits<double>::infinity());
    std::vector<double> row(nv);
    std::vector<char> taken(nv, 0);
    double radius = 0.0;
    for (int s = 0; s < count; ++s) {
        out.vertex_ids.push_back(current);
        taken[static_cast<std::size_t>(current)] = 1;
        k.squared_distance_rows(embedding.row(current), base, nv, stride, stride, row.data());
        k.min_update(running.data(), row.data(), nv);
        if (s == 0) radius = std::sqrt(*std::max_element(row.begin(), row.end()));
        out.coverage_radii.push_back(radius);
        if (s + 1 == count) break;
        int best = -1;
        double best_d = -1.0;
        for (std::size_t v = 0; v < nv; ++v) {
            if (!taken[v] && running[v] > best_d) {
                best_d = running[v];
                best = static_cast<int>(v);
            }
        }
        current = best;
        radius = std::sqrt(best_d);
    }
    return out;
}

int BiharmonicTable::index_of(int vertex) const {
    const auto it = std::find(sample_ids.begin(), sample_ids.end(), vertex);
    return it == sample_ids.end() ? -1 : static_cast<int>(it - sample_ids.begin());
}

BiharmonicTable all_pairs_biharmonic(const BiharmonicEmbedding& embedding, const SampleSet& samples,
                                     bool keep_full_rows) {
    const std::size_t nv = embedding.vertex_count();
    const int n = static_cast<int>(samples.vertex_ids.size());
    for (int v : samples.vertex_ids) check_vertex(nv, v);
    const std::size_t stride = (embedding.dimension() + 3) / 4 * 4;
    const auto& k = kernels::active();

    BiharmonicTable t;
    t.sample_ids = samples.vertex_ids;
    t.distances.resize(n, n);
    RowMatrix rows(n, static_cast<Eigen::Index>(nv));
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < n; ++i) {
        double* r = rows.row(i).data();
        k.squared_distance_rows(embedding.row(samples.vertex_ids[i]), embedding.row(0), nv, stride, stride, r);
        for (std::size_t v = 0; v < nv; ++v) r[v] = std::sqrt(r[v]);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) t.distances(i, j) = rows(i, samples.vertex_ids[j]);
        t.distances(i, i) = 0.0;
    }
    if (keep_full_rows) t.full_rows = std::move(rows);
    return t;
}

WksField compute_wks(const SpectralBasis& basis, int bands, double sigma_factor) {
    if (bands < 2) throw Error(ErrorCode::InvalidArgument, "WKS needs at least two bands");
    if (!(sigma_factor > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma factor must be positive");
    const int k = basis.size();
    if (k < 3) throw Error(ErrorCode::DegenerateSpectrum, "WKS needs at least three eigenpairs");
    const double l2 = basis.eigenvalues(1);
    const double lk = basis.eigenvalues(k - 1);
    if (!(l2 > 0.0) || !(lk > l2)) {
        throw Error(ErrorCode::DegenerateSpectrum, "lambda_2 must be positive and below lambda_k");
    }
    const double span = std::log(lk) - std::log(l2);
    const double delta = span / (bands - 1 + 4.0 * sigma_factor);
    WksField f;
    f.sigma = sigma_factor * delta;
    f.energies.resize(bands);
    Eigen::VectorXd log_e(bands);
    for (int j = 0; j < bands; ++j) {
        log_e(j) = std::log(l2) + 2.0 * f.sigma + j * delta;
        f.energies(j) = std::exp(log_e(j));
    }

    // weights(i, j): band j response of eigenvalue i, normalized over i
    const int m = k - 1;
    Eigen::MatrixXd weights(m, bands);
    for (int j = 0; j < bands; ++j) {
        for (int i = 0; i < m; ++i) {
            const double lam = basis.eigenvalues(i + 1);
            const double z = (log_e(j) - std::log(lam)) / f.sigma;
            weights(i, j) = lam > 0.0 ? std::exp(-0.5 * z * z) : 0.0;
        }
        const double s = weights.col(j).sum();
        if (s > 0.0) weights.col(j) /= s;
    }

    const auto nv = static_cast<Eigen::Index>(basis.vertex_count());
    f.signatures.resize(nv, bands);
    const int chunks = static_cast<int>((nv + kWksChunk - 1) / kWksChunk);
#pragma omp parallel for schedule(dynamic, 1)
    for (int c = 0; c < chunks; ++c) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(c) * kWksChunk;
        const Eigen::Index rn = std::min<Eigen::Index>(kWksChunk, nv - r0);
        const Eigen::MatrixXd sq = basis.eigenvectors.block(r0, 1, rn, m).array().square();
        Eigen::MatrixXd s = sq * weights;
        for (Eigen::Index r = 0; r < rn; ++r) {
            const double total = s.row(r).sum();
            if (total > 0.0) s.row(r) /= total;
            else s.row(r).setConstant(1.0 / bands);
        }
        f.signatures.middleRows(r0, rn) = s;
    }
    return f;
}

double wks_distance(const WksField& field, int x, int y) {
    check_vertex(static_cast<std::size_t>(field.signatures.rows()), x);
    check_vertex(static_cast<std::size_t>(field.signatures.rows()), y);
    return kernels::active().squared_distance(field.signatures.row(x).data(), field.signatures.row(y).data(),
                                              static_cast<std::size_t>(field.signatures.cols()));
}

void write_table_csv(const BiharmonicTable& table, const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "w");
    if (!fp) throw Error(ErrorCode::IoError, "cannot write " + path);
    std::fputs("vertex", fp);
    for (int id : table.sample_ids) std::fprintf(fp, ",%d", id);
    std::fputc('\n', fp);
    for (int i = 0; i < table.size(); ++i) {
        std::fprintf(fp, "%d", table.sample_ids[i]);
        for (int j = 0; j < table.size(); ++j) std::fprintf(fp, ",%.17g", table.distances(i, j));
        std::fputc('\n', fp);
    }
    std::fclose(fp);
}

void write_matrix_blob(const RowMatrix& m, const std::string& key, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    char k[64] = {};
    std::memcpy(k, key.data(), std::min<std::size_t>(64, key.size()));
    const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
    out.write(kMatrixMagic, 8);
    out.write(k, 64);
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!out) throw Error(ErrorCode::IoError, "short write to " + path);
}

bool read_matrix_blob(const std::string& path, const std::string& key, RowMatrix& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    char magic[8];
    char k[64];
    std::uint64_t dims[2];
    in.read(magic, 8);
    in.read(k, 64);
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in || std::memcmp(magic, kMatrixMagic, 8) != 0) return false;
    char expected[64] = {};
    std::memcpy(expected, key.data(), std::min<std::size_t>(64, key.size()));
    if (std::memcmp(k, expected, 64) != 0) return false;
    if (dims[0] > (1ull << 31) || dims[1] > (1ull << 31)) return false;
    RowMatrix m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!in) return false;
    out = std::move(m);
    return true;
}

}  // namespace isym

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "csrr/matrix.hpp"
#include "csrr/solver_bf.hpp"
#include "csrr/solver_nnm.hpp"

namespace csrr {

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ModelKind : uint8_t { Nnm = 0, Bf = 1 };

/// Serialized model: header (kind, dims, config echo, seed) followed by the
/// component matrices as length-prefixed little-endian f64 arrays.
struct ModelFile {
    ModelKind kind = ModelKind::Nnm;
    Index rows = 0, cols = 0, latent_dim = 0;  // latent_dim = 0 for Nnm
    uint64_t seed = 0;
    double eta = 0, lambda1 = 0, lambda2 = 0, alpha = 1;
    uint8_t variant = 0;  // 0 = TypeI, 1 = TypeII
    Matrix u_or_p;        // U (n x m) for Nnm, P (d x n) for Bf
    Matrix q;             // empty for Nnm, Q (d x m) for Bf
    Matrix v;             // n x m

    Matrix predict() const {
        if (kind == ModelKind::Nnm) return u_or_p + v;
        return u_or_p.transpose() * q + v;
    }
};

namespace detail {

constexpr std::array<char, 4> kMagic{'C', 'S', 'R', 'R'};
constexpr uint8_t kVersion = 1;

inline void put_u64(std::ostream& out, uint64_t v) {
    std::array<unsigned char, 8> b;
    for (int i = 0; i < 8; ++i) b[static_cast<size_t>(i)] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

inline uint64_t get_u64(std::istream& in, const std::string& what) {
    std::array<unsigned char, 8> b;
    if (!in.read(reinterpret_cast<char*>(b.data()), 8))
        throw FormatError("truncated model file while reading " + what + " at offset " +
                          std::to_string(in.tellg()));
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<size_t>(i)];
    return v;
}

inline void put_f64(std::ostream& out, double d) {
    put_u64(out, std::bit_cast<uint64_t>(d));
}

inline double get_f64(std::istream& in, const std::string& what) {
    return std::bit_cast<double>(get_u64(in, what));
}

inline void put_matrix(std::ostream& out, const Matrix& m) {
    put_u64(out, static_cast<uint64_t>(m.size()));
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

inline Matrix get_matrix(std::istream& in, Index rows, Index cols, const std::string& what) {
    uint64_t len = get_u64(in, what + " length");
    if (len != static_cast<uint64_t>(rows * cols))
        throw FormatError(what + " payload length " + std::to_string(len) +
                          " does not match header dims " + std::to_string(rows) + "x" +
                          std::to_string(cols));
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = get_f64(in, what);
    return m;
}

}  // namespace detail

inline void save_model(const ModelFile& mf, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write(detail::kMagic.data(), 4);
    out.put(static_cast<char>(detail::kVersion));
    out.put(static_cast<char>(mf.kind));
    out.put(static_cast<char>(mf.variant));
    detail::put_u64(out, static_cast<uint64_t>(mf.rows));
    detail::put_u64(out, static_cast<uint64_t>(mf.cols));
    detail::put_u64(out, static_cast<uint64_t>(mf.latent_dim));
    detail::put_u64(out, mf.seed);
    detail::put_f64(out, mf.eta);
    detail::put_f64(out, mf.lambda1);
    detail::put_f64(out, mf.lambda2);
    detail::put_f64(out, mf.alpha);
    detail::put_matrix(out, mf.u_or_p);
    if (mf.kind == ModelKind::Bf) detail::put_matrix(out, mf.q);
    detail::put_matrix(out, mf.v);
    if (!out) throw FormatError("write failed: " + path);
}

inline ModelFile load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file: " + path);
    std::array<char, 4> magic;
    if (!in.read(magic.data(), 4) || magic != detail::kMagic)
        throw FormatError("bad magic bytes at offset 0: " + path);
    int version = in.get();
    if (version != detail::kVersion)
        throw FormatError("unsupported model version at offset 4");
    int kind = in.get();
    if (kind != 0 && kind != 1) throw FormatError("unknown solver kind at offset 5");
    ModelFile mf;
    mf.kind = static_cast<ModelKind>(kind);
    int variant = in.get();
    if (variant != 0 && variant != 1) throw FormatError("unknown loss variant at offset 6");
    mf.variant = static_cast<uint8_t>(variant);
    mf.rows = static_cast<Index>(detail::get_u64(in, "rows"));
    mf.cols = static_cast<Index>(detail::get_u64(in, "cols"));
    mf.latent_dim = static_cast<Index>(detail::get_u64(in, "latent_dim"));
    mf.seed = detail::get_u64(in, "seed");
    mf.eta = detail::get_f64(in, "eta");
    mf.lambda1 = detail::get_f64(in, "lambda1");
    mf.lambda2 = detail::get_f64(in, "lambda2");
    mf.alpha = detail::get_f64(in, "alpha");
    if (mf.rows < 1 || mf.cols < 1) throw FormatError("invalid dims in header");
    if (mf.kind == ModelKind::Bf) {
        if (mf.latent_dim < 1) throw FormatError("Bf model requires latent_dim >= 1");
        mf.u_or_p = detail::get_matrix(in, mf.latent_dim, mf.rows, "P");
        mf.q = detail::get_matrix(in, mf.latent_dim, mf.cols, "Q");
    } else {
        mf.u_or_p = detail::get_matrix(in, mf.rows, mf.cols, "U");
    }
    mf.v = detail::get_matrix(in, mf.rows, mf.cols, "V");
    return mf;
}

inline ModelFile model_from_nnm(const NnmState& s, const SolverConfig& cfg) {
    ModelFile mf;
    mf.kind = ModelKind::Nnm;
    mf.rows = s.u.rows();
    mf.cols = s.u.cols();
    mf.seed = cfg.seed;
    mf.eta = cfg.eta;
    mf.lambda1 = cfg.lambda1;
    mf.lambda2 = cfg.lambda2;
    mf.alpha = cfg.cost.alpha;
    mf.variant = cfg.cost.variant == LossVariant::TypeI ? 0 : 1;
    mf.u_or_p = s.u;
    mf.v = s.v;
    return mf;
}

inline ModelFile model_from_bf(const BfState& s, const BfConfig& cfg) {
    ModelFile mf;
    mf.kind = ModelKind::Bf;
    mf.rows = s.v.rows();
    mf.cols = s.v.cols();
    mf.latent_dim = cfg.latent_dim;
    mf.seed = cfg.base.seed;
    mf.eta = cfg.base.eta;
    mf.lambda1 = cfg.base.lambda1;
    mf.lambda2 = cfg.base.lambda2;
    mf.alpha = cfg.base.cost.alpha;
    mf.variant = cfg.base.cost.variant == LossVariant::TypeI ? 0 : 1;
    mf.u_or_p = s.p;
    mf.q = s.q;
    mf.v = s.v;
    return mf;
}

}  // namespace csrr

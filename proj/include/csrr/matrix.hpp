#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace csrr {

// Row-major dense matrix; rows index items (n), columns index users (m).
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Binary observation matrix A with its positive index set.
class ObservationMatrix {
public:
    ObservationMatrix(Index rows, Index cols)
        : rows_(rows), cols_(cols), mask_(static_cast<size_t>(rows * cols), 0) {
        if (rows < 1 || cols < 1)
            throw DimensionError("ObservationMatrix requires rows >= 1 and cols >= 1");
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    void add_positive(Index i, Index j) {
        check(i, j);
        auto& cell = mask_[static_cast<size_t>(i * cols_ + j)];
        if (cell) return;  // no duplicates in the index set
        cell = 1;
        positives_.emplace_back(i, j);
    }

    bool is_positive(Index i, Index j) const {
        check(i, j);
        return mask_[static_cast<size_t>(i * cols_ + j)] != 0;
    }

    const std::vector<std::pair<Index, Index>>& positives() const { return positives_; }
    Index positive_count() const { return static_cast<Index>(positives_.size()); }

    Matrix dense() const {
        Matrix a = Matrix::Zero(rows_, cols_);
        for (auto [i, j] : positives_) a(i, j) = 1.0;
        return a;
    }

private:
    void check(Index i, Index j) const {
        if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
            throw DimensionError("observation index out of range");
    }

    Index rows_, cols_;
    std::vector<uint8_t> mask_;
    std::vector<std::pair<Index, Index>> positives_;
};

struct SvdResult {
    Matrix left;                    // n x r
    Eigen::VectorXd singular;       // length r, non-increasing, >= 0
    Matrix right;                   // m x r
};

/// Thin SVD; singular values returned non-increasing.
inline SvdResult svd(const Matrix& m) {
    if (!m.allFinite()) throw NumericError("svd: input has non-finite entries");
    Eigen::BDCSVD<Matrix> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw NumericError("svd: decomposition did not converge");
    return SvdResult{dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

inline Matrix clamp_unit(const Matrix& m) {
    return m.cwiseMax(0.0).cwiseMin(1.0);
}

inline double nuclear_norm(const Matrix& m) {
    return svd(m).singular.sum();
}

}  // namespace csrr

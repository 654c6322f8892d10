#ifndef NETREC_SAMPLE_MATRIX_HPP
#define NETREC_SAMPLE_MATRIX_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "netrec/common.hpp"

namespace netrec {

/// N x M data matrix: row i holds the M observed values of node i
/// (column m is one observation vector). Stored row-major.
class SampleMatrix {
public:
    SampleMatrix(NodeId n, int m) : n_(n), m_(m) {
        if (n < 1 || m < 0) throw std::invalid_argument("SampleMatrix: bad dimensions");
        values_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(m), 0.0);
    }

    NodeId num_nodes() const { return n_; }
    int num_samples() const { return m_; }

    double operator()(NodeId i, int m) const {
        return values_[static_cast<std::size_t>(i) * m_ + static_cast<std::size_t>(m)];
    }
    void set(NodeId i, int m, double v) {
        values_[static_cast<std::size_t>(i) * m_ + static_cast<std::size_t>(m)] = v;
    }

    std::span<const double> row(NodeId i) const {
        return {values_.data() + static_cast<std::size_t>(i) * m_, static_cast<std::size_t>(m_)};
    }

    /// true iff every entry is exactly -1 or +1 (required by the Ising model)
    bool spin_valued() const {
        for (double v : values_)
            if (v != 1.0 && v != -1.0) return false;
        return true;
    }

private:
    NodeId n_;
    int m_;
    std::vector<double> values_;
};

}  // namespace netrec

#endif

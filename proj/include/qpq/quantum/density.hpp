// Density matrices and mixtures of pure states.
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>

#include "qpq/quantum/spectrum.hpp"
#include "qpq/quantum/state.hpp"

namespace qpq {

class DensityMatrix {
public:
    explicit DensityMatrix(SquareMatrix m) : m_(std::move(m)) {
        const std::size_t d = m_.dim();
        if (d != 2 && d != 4 && d != 8) {
            throw std::invalid_argument("DensityMatrix: dimension must be 2, 4 or 8");
        }
        if (!m_.is_hermitian(1e-10)) {
            throw std::invalid_argument("DensityMatrix: not Hermitian within 1e-10");
        }
        if (std::abs(m_.trace() - Complex(1.0, 0.0)) > 1e-10) {
            throw std::invalid_argument("DensityMatrix: trace must be 1 within 1e-10");
        }
        const EigenSystem es = hermitian_spectrum(m_);
        if (es.eigenvalues.back() < -1e-9) {
            throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
        }
    }

    std::size_t dim() const { return m_.dim(); }
    const SquareMatrix& entries() const { return m_; }

private:
    SquareMatrix m_;
};

// sum_i w_i |phi_i><phi_i| for a probability vector w.
inline DensityMatrix mixture(std::span<const double> weights,
                             std::span<const PureState> states) {
    if (weights.size() != states.size() || weights.empty()) {
        throw std::invalid_argument("mixture: weights and states must pair up");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("mixture: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        throw std::invalid_argument("mixture: weights must sum to 1 within 1e-10");
    }
    const std::size_t d = states[0].dim();
    SquareMatrix acc(d);
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i].dim() != d) throw std::invalid_argument("mixture: dimension mismatch");
        for (std::size_t r = 0; r < d; ++r)
            for (std::size_t c = 0; c < d; ++c)
                acc(r, c) += weights[i] * states[i][r] * std::conj(states[i][c]);
    }
    return DensityMatrix(std::move(acc));
}

inline SquareMatrix support_projector(const DensityMatrix& rho, double tol = 1e-9) {
    return support_projector_of(rho.entries(), tol);
}

}  // namespace qpq

// Pure states and unitaries on one to three qubits.
//
// Composite indices order subsystems most-significant first: for three
// qubits labelled (c, b, s) the amplitude of |c b s> sits at index
// 4c + 2b + s. Everything is a value type; nothing here mutates shared
// state, so instances can be used freely across threads.
#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qpq/quantum/linalg.hpp"
#include "qpq/quantum/symbols.hpp"

namespace qpq {

inline constexpr double kNormTol = 1e-10;
inline constexpr std::size_t kMaxDim = 8;

class PureState {
public:
    explicit PureState(std::vector<Complex> amplitudes) : a_(std::move(amplitudes)) {
        const std::size_t d = a_.size();
        if (d != 2 && d != 4 && d != 8) {
            throw std::invalid_argument("PureState: dimension must be 2, 4 or 8");
        }
        double norm2 = 0.0;
        for (const auto& z : a_) norm2 += std::norm(z);
        if (std::abs(norm2 - 1.0) > kNormTol) {
            throw std::invalid_argument("PureState: squared norm must be 1 within 1e-10");
        }
    }

    std::size_t dim() const { return a_.size(); }
    std::size_t qubit_count() const { return a_.size() == 2 ? 1 : (a_.size() == 4 ? 2 : 3); }
    const std::vector<Complex>& amplitudes() const { return a_; }
    const Complex& operator[](std::size_t i) const { return a_[i]; }

private:
    std::vector<Complex> a_;
};

inline PureState ket(PreparedSymbol s) {
    const double r = 1.0 / std::numbers::sqrt2;
    switch (s) {
        case PreparedSymbol::Z0: return PureState({1.0, 0.0});
        case PreparedSymbol::Z1: return PureState({0.0, 1.0});
        case PreparedSymbol::XPlus: return PureState({r, r});
        case PreparedSymbol::XMinus: return PureState({r, -r});
    }
    throw std::logic_error("ket: bad PreparedSymbol");
}

// Kronecker product, left argument most significant.
inline PureState tensor(const PureState& a, const PureState& b) {
    if (a.dim() * b.dim() > kMaxDim) {
        throw std::invalid_argument("tensor: dimension overflow (max 8)");
    }
    std::vector<Complex> out(a.dim() * b.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < b.dim(); ++j) out[i * b.dim() + j] = a[i] * b[j];
    return PureState(std::move(out));
}

class UnitaryOperator {
public:
    explicit UnitaryOperator(SquareMatrix m) : m_(std::move(m)) {
        const std::size_t d = m_.dim();
        if (d != 2 && d != 4 && d != 8) {
            throw std::invalid_argument("UnitaryOperator: dimension must be 2, 4 or 8");
        }
        if (max_abs_diff(m_.adjoint() * m_, SquareMatrix::identity(d)) > kNormTol) {
            throw std::invalid_argument("UnitaryOperator: U^dagger U != I within 1e-10");
        }
    }

    std::size_t dim() const { return m_.dim(); }
    const SquareMatrix& matrix() const { return m_; }

private:
    SquareMatrix m_;
};

inline UnitaryOperator tensor(const UnitaryOperator& a, const UnitaryOperator& b) {
    if (a.dim() * b.dim() > kMaxDim) {
        throw std::invalid_argument("tensor: dimension overflow (max 8)");
    }
    return UnitaryOperator(kron(a.matrix(), b.matrix()));
}

inline PureState apply(const UnitaryOperator& u, const PureState& s) {
    if (u.dim() != s.dim()) throw std::invalid_argument("apply: dimension mismatch");
    std::vector<Complex> out(s.dim());
    for (std::size_t r = 0; r < s.dim(); ++r) {
        Complex acc{};
        for (std::size_t c = 0; c < s.dim(); ++c) acc += u.matrix()(r, c) * s[c];
        out[r] = acc;
    }
    return PureState(std::move(out));
}

// |a><b| outer product of amplitude vectors.
inline SquareMatrix outer(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("outer: dimension mismatch");
    SquareMatrix out(a.dim());
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t c = 0; c < a.dim(); ++c) out(r, c) = a[r] * std::conj(b[c]);
    return out;
}

inline SquareMatrix projector(const PureState& a) { return outer(a, a); }

inline double max_abs_diff(const PureState& a, const PureState& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace qpq

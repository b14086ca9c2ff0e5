// Hermitian eigendecomposition by cyclic complex Jacobi rotations, plus the
// spectral utilities built on it (trace norm, support projector).
//
// Jacobi is exact-enough and simple at these sizes: every matrix in this
// project is at most 8x8.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "qpq/quantum/linalg.hpp"

namespace qpq {

struct EigenSystem {
    std::vector<double> eigenvalues;  // descending
    SquareMatrix eigenvectors;        // column j pairs with eigenvalues[j]
};

inline EigenSystem hermitian_spectrum(const SquareMatrix& input,
                                      double hermiticity_tol = 1e-10) {
    const std::size_t n = input.dim();
    if (n == 0) throw std::invalid_argument("hermitian_spectrum: empty matrix");
    if (!input.is_hermitian(hermiticity_tol)) {
        throw std::invalid_argument("hermitian_spectrum: matrix is not Hermitian");
    }

    // Work on the exactly Hermitian average so input roundoff cannot push the
    // iteration off the Hermitian manifold.
    SquareMatrix a(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) a(r, c) = 0.5 * (input(r, c) + std::conj(input(c, r)));

    SquareMatrix v = SquareMatrix::identity(n);
    const double target = 1e-12 * std::max(1.0, a.frobenius_norm());

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off2 += std::norm(a(p, q));
        if (std::sqrt(2.0 * off2) <= target) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double g = std::abs(a(p, q));
                if (g <= target / static_cast<double>(n * n)) continue;

                // Factor the (p,q) block: a phase turns it real symmetric,
                // then a plane rotation with tan(theta) = t zeroes it.
                const Complex phase = a(p, q) / g;
                const double app = std::real(a(p, p));
                const double aqq = std::real(a(q, q));
                const double tau = (aqq - app) / (2.0 * g);
                const double t =
                    (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                // G is identity outside the (p,q) plane:
                //   G(p,p)=c  G(p,q)=s  G(q,p)=-s*conj(phase)  G(q,q)=c*conj(phase)
                // and A <- G^dagger A G annihilates A(p,q).
                const Complex gqp = -s * std::conj(phase);
                const Complex gqq = c * std::conj(phase);
                for (std::size_t r = 0; r < n; ++r) {  // A <- A G
                    const Complex cp = a(r, p), cq = a(r, q);
                    a(r, p) = cp * c + cq * gqp;
                    a(r, q) = cp * s + cq * gqq;
                }
                for (std::size_t k = 0; k < n; ++k) {  // A <- G^dagger A
                    const Complex rp = a(p, k), rq = a(q, k);
                    a(p, k) = rp * c - rq * (s * phase);
                    a(q, k) = rp * s + rq * (c * phase);
                }
                for (std::size_t r = 0; r < n; ++r) {  // V <- V G
                    const Complex vp = v(r, p), vq = v(r, q);
                    v(r, p) = vp * c + vq * gqp;
                    v(r, q) = vp * s + vq * gqq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = std::real(a(i, i));
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return diag[l] > diag[r]; });

    EigenSystem out;
    out.eigenvalues.resize(n);
    out.eigenvectors = SquareMatrix(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigenvalues[j] = diag[order[j]];
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, j) = v(r, order[j]);
    }
    return out;
}

// Sum of absolute eigenvalues (Schatten-1 norm of a Hermitian matrix).
inline double trace_norm(const SquareMatrix& a, double hermiticity_tol = 1e-10) {
    const EigenSystem es = hermitian_spectrum(a, hermiticity_tol);
    double s = 0.0;
    for (double lambda : es.eigenvalues) s += std::abs(lambda);
    return s;
}

// Orthogonal projector onto the span of eigenvectors with eigenvalue > tol.
inline SquareMatrix support_projector_of(const SquareMatrix& a, double tol = 1e-9) {
    const EigenSystem es = hermitian_spectrum(a);
    const std::size_t n = a.dim();
    SquareMatrix p(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (es.eigenvalues[j] <= tol) continue;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c)
                p(r, c) += es.eigenvectors(r, j) * std::conj(es.eigenvectors(c, j));
    }
    return p;
}

}  // namespace qpq

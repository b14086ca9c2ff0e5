// Dense complex matrices sized for few-qubit systems (dimension <= 8).
#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qpq {

using Complex = std::complex<double>;

class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t dim) : dim_(dim), a_(dim * dim) {}

    static SquareMatrix identity(std::size_t dim) {
        SquareMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t dim() const { return dim_; }

    Complex& operator()(std::size_t r, std::size_t c) { return a_[r * dim_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return a_[r * dim_ + c]; }

    SquareMatrix& operator+=(const SquareMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
        return *this;
    }
    SquareMatrix& operator-=(const SquareMatrix& o) {
        require_same_dim(o);
        for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
        return *this;
    }
    SquareMatrix& operator*=(Complex z) {
        for (auto& v : a_) v *= z;
        return *this;
    }

    friend SquareMatrix operator+(SquareMatrix a, const SquareMatrix& b) { return a += b; }
    friend SquareMatrix operator-(SquareMatrix a, const SquareMatrix& b) { return a -= b; }
    friend SquareMatrix operator*(Complex z, SquareMatrix a) { return a *= z; }
    friend SquareMatrix operator*(double x, SquareMatrix a) { return a *= Complex(x, 0.0); }

    friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
        a.require_same_dim(b);
        const std::size_t n = a.dim_;
        SquareMatrix out(n);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < n; ++k) {
                const Complex ark = a(r, k);
                if (ark == Complex{}) continue;
                for (std::size_t c = 0; c < n; ++c) out(r, c) += ark * b(k, c);
            }
        }
        return out;
    }

    SquareMatrix adjoint() const {
        SquareMatrix out(dim_);
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = 0; c < dim_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    Complex trace() const {
        Complex t{};
        for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a_) s += std::norm(v);
        return std::sqrt(s);
    }

    bool is_hermitian(double tol) const {
        for (std::size_t r = 0; r < dim_; ++r)
            for (std::size_t c = r; c < dim_; ++c)
                if (std::abs((*this)(r, c) - std::conj((*this)(c, r))) > tol) return false;
        return true;
    }

private:
    void require_same_dim(const SquareMatrix& o) const {
        if (dim_ != o.dim_) throw std::invalid_argument("SquareMatrix: dimension mismatch");
    }

    std::size_t dim_ = 0;
    std::vector<Complex> a_;
};

inline SquareMatrix kron(const SquareMatrix& a, const SquareMatrix& b) {
    const std::size_t na = a.dim(), nb = b.dim();
    SquareMatrix out(na * nb);
    for (std::size_t ra = 0; ra < na; ++ra)
        for (std::size_t ca = 0; ca < na; ++ca) {
            const Complex f = a(ra, ca);
            if (f == Complex{}) continue;
            for (std::size_t rb = 0; rb < nb; ++rb)
                for (std::size_t cb = 0; cb < nb; ++cb)
                    out(ra * nb + rb, ca * nb + cb) = f * b(rb, cb);
        }
    return out;
}

inline double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("max_abs_diff: dimension mismatch");
    double m = 0.0;
    for (std::size_t r = 0; r < a.dim(); ++r)
        for (std::size_t c = 0; c < a.dim(); ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
    return m;
}

}  // namespace qpq

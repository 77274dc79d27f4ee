#pragma once

// Tangential pseudo-spectral machinery: real-to-half-complex transforms built
// on an iterative radix-2 FFT (nx is a power of two by construction), the
// exact spectral x-derivative, and the 2/3-rule dealias filter.
//
// Coefficient convention: c_k = (1/nx) * sum_i f(x_i) e^{-i k x_i}, stored for
// k-index 0..nx/2 only (the field is real).  A constant field c therefore has
// c_0 = c, and Parseval reads  ∫ f^2 dx = lx * sum_k mult_k |c_k|^2  with
// mult_k = 1 for k = 0 and the Nyquist index, 2 otherwise.

#include <complex>
#include <vector>

#include "grid.hpp"

namespace phlab {

using cplx = std::complex<double>;

/// Half-complex tangential spectrum of a real Field; y-major rows of nk()
/// coefficients.  Row-j coefficient k lives at c[j*nk + k].
struct SpectralField {
    GridPtr grid;
    std::vector<cplx> c;

    SpectralField() = default;
    explicit SpectralField(GridPtr g) : grid(std::move(g)), c(grid->nk() * grid->ny, cplx(0.0, 0.0)) {}

    std::size_t nk() const { return grid->nk(); }
    cplx& at(std::size_t k, std::size_t j) { return c[j * nk() + k]; }
    cplx at(std::size_t k, std::size_t j) const { return c[j * nk() + k]; }
};

namespace detail {

/// Minimal iterative radix-2 complex FFT with precomputed twiddles.
/// Forward direction computes X_k = sum_i a_i e^{-2*pi*i*k*idx/n}.
class Fft {
  public:
    explicit Fft(std::size_t n) : n_(n), tw_(n / 2), rev_(n) {
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double ang = -2.0 * M_PI * static_cast<double>(j) / static_cast<double>(n);
            tw_[j] = cplx(std::cos(ang), std::sin(ang));
        }
        std::size_t lg = 0;
        while ((std::size_t{1} << lg) < n) ++lg;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < lg; ++b)
                if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (lg - 1 - b);
            rev_[i] = r;
        }
    }

    void forward(std::vector<cplx>& a) const {
        for (std::size_t i = 0; i < n_; ++i)
            if (i < rev_[i]) std::swap(a[i], a[rev_[i]]);
        for (std::size_t len = 2; len <= n_; len <<= 1) {
            const std::size_t step = n_ / len;
            for (std::size_t start = 0; start < n_; start += len) {
                for (std::size_t j = 0; j < len / 2; ++j) {
                    const cplx w = tw_[j * step];
                    const cplx u = a[start + j];
                    const cplx t = w * a[start + j + len / 2];
                    a[start + j] = u + t;
                    a[start + j + len / 2] = u - t;
                }
            }
        }
    }

    void inverse(std::vector<cplx>& a) const {
        for (auto& z : a) z = std::conj(z);
        forward(a);
        const double s = 1.0 / static_cast<double>(n_);
        for (auto& z : a) z = std::conj(z) * s;
    }

    std::size_t size() const { return n_; }

  private:
    std::size_t n_;
    std::vector<cplx> tw_;
    std::vector<std::size_t> rev_;
};

} // namespace detail

/// Forward transform of every y-row.  The k = 0 (and Nyquist) coefficients of
/// a real field are real; their imaginary parts are forced to exactly zero.
inline SpectralField to_spectral(const Field& f) {
    if (!f.finite()) throw std::invalid_argument("to_spectral: field has non-finite entries");
    const Grid& g = *f.grid;
    SpectralField s(f.grid);
    detail::Fft fft(g.nx);
    std::vector<cplx> buf(g.nx);
    const double inv_n = 1.0 / static_cast<double>(g.nx);
    const std::size_t nk = g.nk();
    for (std::size_t j = 0; j < g.ny; ++j) {
        const double* row = f.row(j);
        for (std::size_t i = 0; i < g.nx; ++i) buf[i] = cplx(row[i], 0.0);
        fft.forward(buf);
        for (std::size_t k = 0; k < nk; ++k) s.at(k, j) = buf[k] * inv_n;
        s.at(0, j).imag(0.0);
        s.at(nk - 1, j).imag(0.0);
    }
    return s;
}

/// Inverse transform (conjugate-symmetric extension of the half spectrum).
inline Field from_spectral(const SpectralField& s) {
    const Grid& g = *s.grid;
    Field f(s.grid);
    detail::Fft fft(g.nx);
    std::vector<cplx> buf(g.nx);
    const std::size_t nk = g.nk();
    for (std::size_t j = 0; j < g.ny; ++j) {
        buf[0] = s.at(0, j) * static_cast<double>(g.nx);
        for (std::size_t k = 1; k < nk; ++k) {
            const cplx v = s.at(k, j) * static_cast<double>(g.nx);
            buf[k] = v;
            if (k != nk - 1) buf[g.nx - k] = std::conj(v);
        }
        fft.inverse(buf);
        double* row = f.row(j);
        for (std::size_t i = 0; i < g.nx; ++i) row[i] = buf[i].real();
    }
    return f;
}

/// In-place spectral x-derivative: multiplies mode k by (i kx).  The Nyquist
/// mode of an odd derivative cannot be represented by a real field and is
/// zeroed, the standard pseudo-spectral convention.
inline void ddx_inplace(SpectralField& s) {
    const Grid& g = *s.grid;
    const std::size_t nk = g.nk();
    for (std::size_t j = 0; j < g.ny; ++j) {
        for (std::size_t k = 0; k + 1 < nk; ++k) {
            const cplx v = s.at(k, j);
            s.at(k, j) = cplx(-g.kx[k] * v.imag(), g.kx[k] * v.real());
        }
        s.at(nk - 1, j) = cplx(0.0, 0.0);
    }
}

/// Spectral tangential derivative of a real field.
inline Field ddx(const Field& f) {
    SpectralField s = to_spectral(f);
    ddx_inplace(s);
    return from_spectral(s);
}

/// Zeroes every mode with k-index above floor(nx/3) (2/3 dealias rule).
inline void dealias_inplace(SpectralField& s) {
    const Grid& g = *s.grid;
    const std::size_t cut = g.nx / 3;
    const std::size_t nk = g.nk();
    if (cut + 1 >= nk) return;
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t k = cut + 1; k < nk; ++k)
            s.at(k, j) = cplx(0.0, 0.0);
}

inline Field dealias(const Field& f) {
    SpectralField s = to_spectral(f);
    dealias_inplace(s);
    return from_spectral(s);
}

} // namespace phlab

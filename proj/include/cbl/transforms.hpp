#pragma once

#include <cbl/grid.hpp>
#include <fftw3.h>
#include <mutex>
#include <vector>

namespace cbl {

namespace detail {
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}
} // namespace detail

/// DCT-I pair between Chebyshev-Gauss-Lobatto nodal values and Chebyshev
/// coefficients, FFTW-backed. One instance per size; instances own their
/// buffers, so each belongs to a single thread.
class ChebTransform {
  public:
    explicit ChebTransform(int degree) : n_(degree) {
        const int len = n_ + 1;
        in_ = fftw_alloc_real(len);
        out_ = fftw_alloc_real(len);
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        plan_ = fftw_plan_r2r_1d(len, in_, out_, FFTW_REDFT00, FFTW_ESTIMATE);
    }
    ~ChebTransform() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(plan_);
        fftw_free(in_);
        fftw_free(out_);
    }
    ChebTransform(const ChebTransform&) = delete;
    ChebTransform& operator=(const ChebTransform&) = delete;

    int degree() const { return n_; }

    /// nodal values (at cos(j pi / n)) -> coefficients a_0..a_n
    void to_coeffs(const double* nodal, double* coeffs) {
        for (int j = 0; j <= n_; ++j) in_[j] = nodal[j];
        fftw_execute(plan_);
        for (int m = 0; m <= n_; ++m) {
            double cbar = (m == 0 || m == n_) ? 2.0 : 1.0;
            coeffs[m] = out_[m] / (n_ * cbar);
        }
    }

    /// coefficients (any length <= n+1, zero-extended) -> nodal values
    void to_nodal(const double* coeffs, int ncoeffs, double* nodal) {
        for (int m = 0; m <= n_; ++m) {
            double a = (m < ncoeffs) ? coeffs[m] : 0.0;
            in_[m] = (m == 0 || m == n_) ? a : 0.5 * a;
        }
        fftw_execute(plan_);
        for (int j = 0; j <= n_; ++j) nodal[j] = out_[j];
    }

  private:
    int n_;
    double* in_;
    double* out_;
    fftw_plan plan_;
};

/// Real <-> half-complex FFT along the periodic direction.
class FourierTransform {
  public:
    explicit FourierTransform(int m) : m_(m) {
        real_ = fftw_alloc_real(m);
        spec_ = fftw_alloc_complex(m / 2 + 1);
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fwd_ = fftw_plan_dft_r2c_1d(m, real_, spec_, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_c2r_1d(m, spec_, real_, FFTW_ESTIMATE);
    }
    ~FourierTransform() {
        std::lock_guard<std::mutex> lock(detail::fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    FourierTransform(const FourierTransform&) = delete;
    FourierTransform& operator=(const FourierTransform&) = delete;

    int size() const { return m_; }

    /// modes 0..kmax (zero-padded above) -> m physical values
    void to_physical(const Complex* modes, int kmax, double* phys) {
        for (int k = 0; k <= m_ / 2; ++k) {
            Complex v = (k <= kmax) ? modes[k] : Complex(0.0, 0.0);
            spec_[k][0] = v.real();
            spec_[k][1] = v.imag();
        }
        fftw_execute(bwd_);
        for (int j = 0; j < m_; ++j) phys[j] = real_[j];
    }

    /// m physical values -> modes 0..kmax (with the 1/m normalization)
    void to_modes(const double* phys, Complex* modes, int kmax) {
        for (int j = 0; j < m_; ++j) real_[j] = phys[j];
        fftw_execute(fwd_);
        for (int k = 0; k <= kmax; ++k)
            modes[k] = Complex(spec_[k][0] / m_, spec_[k][1] / m_);
    }

  private:
    int m_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

} // namespace cbl

#include "inertsim/convolution.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>
#include <new>
#include <stdexcept>

#include <fftw3.h>

namespace inertsim {

template <class T>
T* FftwAllocator<T>::allocate(std::size_t n)
{
    void* p = fftw_malloc(n * sizeof(T));
    if (!p && n > 0)
        throw std::bad_alloc();
    return static_cast<T*>(p);
}

template <class T>
void FftwAllocator<T>::deallocate(T* p, std::size_t) noexcept
{
    fftw_free(p);
}

template struct FftwAllocator<double>;
template struct FftwAllocator<std::complex<double>>;

namespace {

std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

constexpr std::size_t direct_cutoff = 48;

}  // namespace

RealFft::RealFft(std::size_t n) : n_(n)
{
    AlignedReal re(n);
    AlignedComplex sp(n / 2 + 1);
    auto* c = reinterpret_cast<fftw_complex*>(sp.data());
    forward_plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), re.data(), c, FFTW_ESTIMATE);
    inverse_plan_ = fftw_plan_dft_c2r_1d(static_cast<int>(n), c, re.data(), FFTW_ESTIMATE);
    if (!forward_plan_ || !inverse_plan_)
        throw std::runtime_error("RealFft: FFTW planning failed for n = " + std::to_string(n));
}

RealFft::~RealFft()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
    fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

const RealFft& RealFft::get(std::size_t n)
{
    static std::map<std::size_t, std::unique_ptr<RealFft>> cache;
    std::lock_guard lock(planner_mutex());
    auto& slot = cache[n];
    if (!slot)
        slot.reset(new RealFft(n));
    return *slot;
}

void RealFft::forward(const double* in, std::complex<double>* out) const
{
    fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                         reinterpret_cast<fftw_complex*>(out));
}

void RealFft::inverse(std::complex<double>* in, double* out) const
{
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in),
                         out);
}

std::size_t fft_size(std::size_t n)
{
    std::size_t s = 1;
    while (s < n)
        s <<= 1;
    return s;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b, std::size_t out_len)
{
    if (a.empty() || b.empty())
        return std::vector<double>(out_len, 0.0);
    const std::size_t full = a.size() + b.size() - 1;
    if (out_len == 0)
        out_len = full;
    std::vector<double> out(out_len, 0.0);
    const std::size_t na = std::min(a.size(), out_len), nb = std::min(b.size(), out_len);
    if (std::min(na, nb) <= direct_cutoff) {
        for (std::size_t i = 0; i < na; ++i)
            for (std::size_t j = 0; j < nb && i + j < out_len; ++j)
                out[i + j] += a[i] * b[j];
        return out;
    }
    const RealFft& fft = RealFft::get(fft_size(std::min(na + nb - 1, full)));
    const std::size_t n = fft.size();
    AlignedReal xa(n, 0.0), xb(n, 0.0), y(n);
    std::copy_n(a.begin(), na, xa.begin());
    std::copy_n(b.begin(), nb, xb.begin());
    AlignedComplex fa(fft.spectrum_size()), fb(fft.spectrum_size());
    fft.forward(xa.data(), fa.data());
    fft.forward(xb.data(), fb.data());
    for (std::size_t k = 0; k < fa.size(); ++k)
        fa[k] *= fb[k];
    fft.inverse(fa.data(), y.data());
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < std::min(out_len, n); ++k)
        out[k] = y[k] * scale;
    return out;
}

namespace {

class VolterraSolver
{
public:
    VolterraSolver(const MatrixKernel& kernel, std::vector<std::vector<double>>& y)
        : kernel_(kernel), y_(y), dim_(y.size()), n_(y.empty() ? 0 : y[0].size())
    {
    }

    void run() { solve(0, n_); }

private:
    double a(std::size_t i, std::size_t k, std::size_t m) const
    {
        const auto& s = kernel_[i][k];
        return m < s.size() ? s[m] : 0.0;
    }

    void solve(std::size_t l, std::size_t r)
    {
        if (r - l <= 64) {
            for (std::size_t n = l; n < r; ++n)
                for (std::size_t i = 0; i < dim_; ++i) {
                    double acc = 0.0;
                    for (std::size_t k = 0; k < dim_; ++k) {
                        if (kernel_[i][k].empty())
                            continue;
                        for (std::size_t s = l; s < n; ++s)
                            acc += a(i, k, n - s) * y_[k][s];
                    }
                    y_[i][n] += acc;
                }
            return;
        }
        const std::size_t mid = l + (r - l) / 2;
        solve(l, mid);
        cross(l, mid, r);
        solve(mid, r);
    }

    // Adds contributions of y[l, mid) to y[mid, r).
    void cross(std::size_t l, std::size_t mid, std::size_t r)
    {
        const std::size_t len_left = mid - l, len_kernel = r - l;
        const RealFft& fft = RealFft::get(fft_size(len_left + len_kernel - 1));
        const std::size_t n = fft.size(), ns = fft.spectrum_size();
        const double scale = 1.0 / static_cast<double>(n);

        auto& spectra = kernel_spectra(len_kernel, fft);
        AlignedReal buf(n);
        std::vector<AlignedComplex> ys(dim_, AlignedComplex(ns));
        for (std::size_t k = 0; k < dim_; ++k) {
            std::fill(buf.begin(), buf.end(), 0.0);
            std::copy_n(y_[k].begin() + static_cast<std::ptrdiff_t>(l), len_left, buf.begin());
            fft.forward(buf.data(), ys[k].data());
        }
        AlignedComplex acc(ns);
        for (std::size_t i = 0; i < dim_; ++i) {
            std::fill(acc.begin(), acc.end(), std::complex<double>(0.0, 0.0));
            bool any = false;
            for (std::size_t k = 0; k < dim_; ++k) {
                const auto& ks = spectra[i * dim_ + k];
                if (ks.empty())
                    continue;
                any = true;
                for (std::size_t q = 0; q < ns; ++q)
                    acc[q] += ks[q] * ys[k][q];
            }
            if (!any)
                continue;
            fft.inverse(acc.data(), buf.data());
            // Output index n' in the product corresponds to time l + n'.
            for (std::size_t t = mid; t < r; ++t)
                y_[i][t] += buf[t - l] * scale;
        }
    }

    // Spectra of A_ik(m), m in [0, len) with A_ik(0) zeroed, cached per length.
    std::vector<AlignedComplex>& kernel_spectra(std::size_t len, const RealFft& fft)
    {
        auto it = cache_.find(len);
        if (it != cache_.end())
            return it->second;
        std::vector<AlignedComplex> spectra(dim_ * dim_);
        AlignedReal buf(fft.size());
        for (std::size_t i = 0; i < dim_; ++i)
            for (std::size_t k = 0; k < dim_; ++k) {
                const auto& s = kernel_[i][k];
                if (s.empty())
                    continue;
                std::fill(buf.begin(), buf.end(), 0.0);
                for (std::size_t m = 1; m < std::min(len, s.size()); ++m)
                    buf[m] = s[m];
                spectra[i * dim_ + k].resize(fft.spectrum_size());
                fft.forward(buf.data(), spectra[i * dim_ + k].data());
            }
        return cache_.emplace(len, std::move(spectra)).first->second;
    }

    const MatrixKernel& kernel_;
    std::vector<std::vector<double>>& y_;
    std::size_t dim_;
    std::size_t n_;
    std::map<std::size_t, std::vector<AlignedComplex>> cache_;
};

void check_shapes(const MatrixKernel& kernel, const std::vector<std::vector<double>>& b)
{
    if (kernel.size() != b.size())
        throw std::invalid_argument("solve_volterra: kernel and right-hand side disagree in dimension");
    for (const auto& row : kernel)
        if (row.size() != b.size())
            throw std::invalid_argument("solve_volterra: kernel must be square");
    for (const auto& v : b)
        if (v.size() != b[0].size())
            throw std::invalid_argument("solve_volterra: right-hand sides differ in length");
}

}  // namespace

std::vector<std::vector<double>> solve_volterra(const MatrixKernel& kernel,
                                                std::vector<std::vector<double>> b)
{
    check_shapes(kernel, b);
    VolterraSolver(kernel, b).run();
    return b;
}

std::vector<std::vector<double>> solve_volterra_direct(const MatrixKernel& kernel,
                                                       std::vector<std::vector<double>> b)
{
    check_shapes(kernel, b);
    const std::size_t dim = b.size(), n = dim ? b[0].size() : 0;
    for (std::size_t t = 1; t < n; ++t)
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t k = 0; k < dim; ++k) {
                const auto& s = kernel[i][k];
                for (std::size_t m = 1; m <= t && m < s.size(); ++m)
                    b[i][t] += s[m] * b[k][t - m];
            }
    return b;
}

}  // namespace inertsim

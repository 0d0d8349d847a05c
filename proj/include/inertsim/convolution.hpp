#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace inertsim {

/// Allocator handing out FFTW-aligned memory.
template <class T>
struct FftwAllocator
{
    using value_type = T;
    FftwAllocator() = default;
    template <class U>
    FftwAllocator(const FftwAllocator<U>&) {}
    T* allocate(std::size_t n);
    void deallocate(T* p, std::size_t) noexcept;
    template <class U>
    bool operator==(const FftwAllocator<U>&) const { return true; }
};

using AlignedReal = std::vector<double, FftwAllocator<double>>;
using AlignedComplex = std::vector<std::complex<double>, FftwAllocator<std::complex<double>>>;

/// Real-to-complex transform of length n with its inverse (unnormalised).
/// Plans are shared and cached; execution is safe from several threads.
class RealFft
{
public:
    static const RealFft& get(std::size_t n);

    std::size_t size() const { return n_; }
    std::size_t spectrum_size() const { return n_ / 2 + 1; }
    void forward(const double* in, std::complex<double>* out) const;
    /// Overwrites `in`.
    void inverse(std::complex<double>* in, double* out) const;

    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

private:
    explicit RealFft(std::size_t n);
    std::size_t n_;
    void* forward_plan_;
    void* inverse_plan_;
};

/// Smallest power of two >= n.
std::size_t fft_size(std::size_t n);

/// First `out_len` terms of the linear convolution a * b (all terms if 0).
std::vector<double> convolve(std::span<const double> a, std::span<const double> b,
                             std::size_t out_len = 0);

/// Kernel of a causal system: kernel[i][k] is the sequence A_ik(m), m >= 0,
/// with A_ik(0) ignored. An empty sequence stands for zero.
using MatrixKernel = std::vector<std::vector<std::vector<double>>>;

/// Solves y_i(n) = b_i(n) + sum_{m=1}^{n} sum_k A_ik(m) y_k(n - m) for
/// n = 0 .. N-1 by divide-and-conquer with FFT products, O(N log^2 N).
std::vector<std::vector<double>> solve_volterra(const MatrixKernel& kernel,
                                                std::vector<std::vector<double>> b);

/// Reference O(N^2) forward substitution for the same system.
std::vector<std::vector<double>> solve_volterra_direct(const MatrixKernel& kernel,
                                                       std::vector<std::vector<double>> b);

}  // namespace inertsim

#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>

namespace ilw::detail {

namespace {

// FFTW's planner is not thread-safe; only fftw_execute_dft is.
std::mutex& planner_mutex()
{
    static std::mutex m;
    return m;
}

fftw_complex* as_fftw(const std::complex<double>* p)
{
    // Out-of-place c2c plans preserve their input.
    return reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(p));
}

} // namespace

Fft::Fft(int n) : n_(n)
{
    fftw_complex* a = fftw_alloc_complex(n);
    fftw_complex* b = fftw_alloc_complex(n);
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT;
    fwd_ = fftw_plan_dft_1d(n, a, b, FFTW_FORWARD, flags);
    bwd_ = fftw_plan_dft_1d(n, a, b, FFTW_BACKWARD, flags);
    fftw_free(a);
    fftw_free(b);
}

Fft::~Fft()
{
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

const Fft& Fft::of(int n)
{
    std::lock_guard lock(planner_mutex()); // constructed before, destroyed after the cache
    static std::map<int, std::unique_ptr<Fft>> cache;
    auto& slot = cache[n];
    if (!slot)
        slot.reset(new Fft(n));
    return *slot;
}

void Fft::forward(const std::complex<double>* in, std::complex<double>* out) const
{
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), as_fftw(in), as_fftw(out));
}

void Fft::backward(const std::complex<double>* in, std::complex<double>* out) const
{
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), as_fftw(in), as_fftw(out));
}

} // namespace ilw::detail

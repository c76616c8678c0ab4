#pragma once

#include <complex>

namespace ilw::detail {

// Unnormalized length-n complex DFT, out-of-place:
//   forward:  out[k] = Σ_j in[j] e^{-2πijk/n}
//   backward: out[j] = Σ_k in[k] e^{+2πijk/n}
// Plans are created once per length and shared; execution is thread-safe.
class Fft {
public:
    static const Fft& of(int n);

    int size() const { return n_; }
    void forward(const std::complex<double>* in, std::complex<double>* out) const;
    void backward(const std::complex<double>* in, std::complex<double>* out) const;

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
    ~Fft();

private:
    explicit Fft(int n);
    int n_;
    void* fwd_;
    void* bwd_;
};

} // namespace ilw::detail

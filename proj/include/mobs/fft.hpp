#pragma once

#include <complex>
#include <span>

#include "mobs/stack.hpp"

namespace mobs {

/// In-place 3D complex DFT over an x-fastest volume, backed by FFTW.
/// Plans are created once per dimension triple under a lock; execution is
/// thread-safe. The inverse is unnormalized (divide by N yourself).
class Fft3d {
public:
    explicit Fft3d(Dims dims);

    void forward(std::span<std::complex<double>> data) const;
    void inverse(std::span<std::complex<double>> data) const;

    const Dims& dims() const noexcept { return dims_; }

private:
    Dims dims_;
    void* forward_plan_;
    void* inverse_plan_;
};

}  // namespace mobs

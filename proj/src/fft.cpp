#include "mobs/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "mobs/error.hpp"

namespace mobs {

namespace {

struct PlanPair {
    fftw_plan forward;
    fftw_plan inverse;
};

// Plans live for the lifetime of the process.
std::mutex plan_mutex;
std::map<std::tuple<std::size_t, std::size_t, std::size_t>, PlanPair> plan_cache;

PlanPair plans_for(const Dims& dims) {
    std::lock_guard lock(plan_mutex);
    const auto key = std::make_tuple(dims.nx, dims.ny, dims.nt);
    if (auto it = plan_cache.find(key); it != plan_cache.end()) return it->second;

    std::vector<std::complex<double>> scratch(dims.size());
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const int nt = static_cast<int>(dims.nt);
    const int ny = static_cast<int>(dims.ny);
    const int nx = static_cast<int>(dims.nx);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    PlanPair pair{fftw_plan_dft_3d(nt, ny, nx, buf, buf, FFTW_FORWARD, flags),
                  fftw_plan_dft_3d(nt, ny, nx, buf, buf, FFTW_BACKWARD, flags)};
    if (pair.forward == nullptr || pair.inverse == nullptr) {
        throw DimensionError("FFTW could not plan a transform of the requested size");
    }
    plan_cache.emplace(key, pair);
    return pair;
}

}  // namespace

Fft3d::Fft3d(Dims dims) : dims_(dims) {
    if (dims.size() == 0) throw DimensionError("empty transform");
    const PlanPair pair = plans_for(dims);
    forward_plan_ = pair.forward;
    inverse_plan_ = pair.inverse;
}

void Fft3d::forward(std::span<std::complex<double>> data) const {
    if (data.size() != dims_.size()) throw DimensionError("FFT buffer size mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), buf, buf);
}

void Fft3d::inverse(std::span<std::complex<double>> data) const {
    if (data.size() != dims_.size()) throw DimensionError("FFT buffer size mismatch");
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(static_cast<fftw_plan>(inverse_plan_), buf, buf);
}

}  // namespace mobs

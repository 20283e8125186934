#pragma once

#include "mobs/percept.hpp"

/// Serial reference for the perception kernels. Single-threaded, evaluates
/// the CSF directly at every bin instead of through a SensitivityGrid, and
/// walks the spectrum in plain linear order. Kept for tests and benchmarks;
/// the MC draw is keyed the same way as the parallel kernel so both paths
/// agree bit-for-bit on keep decisions.
namespace mobs::percept::reference {

SpectralStack apply(SpectralStack spec, const PerceptMethod& method, const ViewingConditions& vc,
                    const csf::BartenParams& params = {});

ImageStack perceive(const ImageStack& stack, const PerceptMethod& method,
                    const ViewingConditions& vc, const csf::BartenParams& params = {});

}  // namespace mobs::percept::reference

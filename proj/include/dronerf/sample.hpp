#pragma once

#include <complex>
#include <vector>

namespace dronerf {

// One IQ sample as stored on disk: I + jQ in IEEE-754 binary32.
using Sample = std::complex<float>;
using SampleVector = std::vector<Sample>;

}  // namespace dronerf

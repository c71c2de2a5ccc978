#pragma once

#include <span>
#include <string_view>

#include "blendloop/timeseries.hpp"

namespace blendloop {

struct Fixture {
    std::string_view name;
    std::string_view description;
    std::span<const double> values;
};

std::span<const Fixture> fixtures();

// Throws InvalidInput for an unknown name.
const Fixture& find_fixture(std::string_view name);

Series<double> fixture_series(std::string_view name);

// 50 raw-flour protein levels simulated from AR(1), mu = 10, phi = 0.7.
Series<double> table1();

} // namespace blendloop

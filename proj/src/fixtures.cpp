#include "blendloop/fixtures.hpp"

#include <array>
#include <string>

namespace blendloop {

namespace {

constexpr std::array<double, 50> kTable1 = {
    10.00, 8.66,  9.43,  9.19,  10.67, 10.17, 8.85,  8.79,  8.82,  9.48,
    8.27,  8.25,  9.00,  7.90,  8.45,  7.67,  5.00,  6.11,  7.47,  9.31,
    9.78,  10.72, 11.95, 10.77, 10.25, 10.18, 8.86,  8.11,  7.97,  7.95,
    9.34,  10.74, 10.42, 11.45, 10.95, 10.15, 9.42,  7.73,  6.81,  7.30,
    7.31,  7.59,  7.51,  8.15,  7.64,  9.27,  10.58, 11.57, 10.23, 11.95,
};

const std::array<Fixture, 1> kFixtures = {{
    {"table1", "raw-flour protein level, AR(1) mu = 10, phi = 0.7, 50 observations", kTable1},
}};

} // namespace

std::span<const Fixture> fixtures()
{
    return kFixtures;
}

const Fixture& find_fixture(std::string_view name)
{
    for (const auto& f : kFixtures)
        if (f.name == name)
            return f;
    throw InvalidInput("unknown fixture '" + std::string(name) + "'");
}

Series<double> fixture_series(std::string_view name)
{
    const auto values = find_fixture(name).values;
    return Eigen::Map<const Series<double>>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Series<double> table1()
{
    return fixture_series("table1");
}

} // namespace blendloop

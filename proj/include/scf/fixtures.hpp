#pragma once

// The three worked reactors used throughout the tests and the `examples`
// command. The same data ships as text files under fixtures/.

#include <optional>
#include <string_view>

#include "scf/core_model.hpp"

namespace scf::fixtures {

/// Liebig uptake, s_in outside the reachable region.
inline ReactorConfig ex1()
{
    ReactorConfig c;
    c.n = 3;
    c.D = 0.05;
    c.r = 0.7;
    c.Y = {1.00, 0.83, 1.25};
    c.s_in = {1.0, 1.0, 0.6};
    c.s1_bar = 0.4;
    c.uptake = {UptakeKind::LiebigMin, {{0.4, 0.25}, {1.3, 0.3}, {0.5, 0.5}}};
    return c;
}

/// Product uptake with negative net growth on the limiting segment.
inline ReactorConfig ex2()
{
    ReactorConfig c;
    c.n = 3;
    c.D = 0.1;
    c.r = 0.7;
    c.Y = {1.00, 0.83, 1.25};
    c.s_in = {1.0, 1.0, 1.0};
    c.s1_bar = 0.4;
    c.uptake = {UptakeKind::Product, {{0.4, 0.25}, {1.3, 0.3}, {0.5, 0.5}}};
    return c;
}

/// Liebig uptake with a periodic orbit whose basin depends on x0.
inline ReactorConfig ex3()
{
    ReactorConfig c;
    c.n = 3;
    c.D = 0.1;
    c.r = 0.3;
    c.Y = {2.0, 0.2, 1.0};
    c.s_in = {0.5, 0.1, 0.5};
    c.s1_bar = 0.25;
    c.uptake = {UptakeKind::LiebigMin, {{0.5, 1.0}, {0.7, 0.4}, {1.0, 1.0}}};
    return c;
}

inline std::optional<ReactorConfig> by_name(std::string_view name)
{
    if (name == "EX1" || name == "ex1")
        return ex1();
    if (name == "EX2" || name == "ex2")
        return ex2();
    if (name == "EX3" || name == "ex3")
        return ex3();
    return std::nullopt;
}

} // namespace scf::fixtures

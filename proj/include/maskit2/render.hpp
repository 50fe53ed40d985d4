#pragma once

// Klein-disk wireframe output: the unit circle, both base tiles as
// chord hexagons, the necklace drawn thick, and optional labeled arcs
// drawn thick grey. One path element per arc; byte-deterministic.

#include "maskit2/tessellation.hpp"

#include <string>
#include <vector>

namespace maskit2 {

std::string render_svg(const Holonomy& h,
                       const std::vector<ArcLabel>& arcs = {});

} // namespace maskit2

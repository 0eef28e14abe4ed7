#pragma once

#include <string>

#include "imp/document.hpp"

namespace imp {

/// Orthogonal projection of the document's maps onto coordinates (i, j).
/// One polyline per original edge per map: "source_map" dashed, "map" solid.
/// Axis labels are coloured by block (positive blue, negative red).
std::string render_svg(const PolyhedronDocument& doc, int i, int j);

}  // namespace imp

#pragma once

// Versioned plain-text mesh format. Coordinates are written with 17
// significant digits so a read-back mesh is bit-identical.

#include <iosfwd>
#include <string>
#include <vector>

#include "trapant/geometry.hpp"

namespace trapant::io {

inline constexpr int mesh_format_version = 1;

/// `comments` are written as leading '#' lines.
void write_mesh(std::ostream& out, const geometry::SegmentMesh& mesh, const std::vector<std::string>& comments = {});

/// Throws ValidationError naming the line on malformed input.
geometry::SegmentMesh read_mesh(std::istream& in);

}  // namespace trapant::io

#pragma once

// Plain-text format for finite metric measure spaces:
//
//   # comment lines and trailing comments start with '#'
//   points 3
//   labels a b c                 (optional)
//   distances
//   0 1 2
//   1 0 1                        row-major, whitespace and/or comma separated
//   2 1 0
//   weights                      or "weights uniform"; omitted means uniform
//   0.25, 0.25, 0.5
//
// Sections may span any number of lines; `points` must come first.

#include <iosfwd>
#include <string>

#include "onsager/core.hpp"

namespace onsager {

DiscreteCorpusSpace read_space(std::istream& in, TriangleCheck check = TriangleCheck::automatic);
DiscreteCorpusSpace load_space(const std::string& path, TriangleCheck check = TriangleCheck::automatic);

void write_space(std::ostream& out, const DiscreteCorpusSpace& space);

}  // namespace onsager

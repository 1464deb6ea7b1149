#pragma once

#include "byteadapt/geometry.hpp"

namespace byteadapt {

/// One detector output. Scores outside [0, 1] are clamped at the file
/// boundary, so everything downstream may assume the closed unit interval.
struct Detection {
  int frame = 0;
  BBox bbox;
  double score = 0.0;
  int source_line = -1;  ///< 1-based line in the originating file, -1 for synthetic input
};

}  // namespace byteadapt

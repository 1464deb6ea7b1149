#pragma once

// Umbrella header: the full tracking, I/O, evaluation and synthesis API.

#include "byteadapt/assignment.hpp"
#include "byteadapt/detection.hpp"
#include "byteadapt/geometry.hpp"
#include "byteadapt/kalman.hpp"
#include "byteadapt/metrics.hpp"
#include "byteadapt/mot_io.hpp"
#include "byteadapt/synth.hpp"
#include "byteadapt/threshold.hpp"
#include "byteadapt/tracker.hpp"

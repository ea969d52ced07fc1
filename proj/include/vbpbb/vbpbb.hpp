#pragma once

// Umbrella header for the VBPBB library: simulation of periodically
// correlated series, KZFT component extraction, period-aligned block
// bootstrap, bias metrics, and the file-level pipeline.

#include "vbpbb/bias.hpp"
#include "vbpbb/csv.hpp"
#include "vbpbb/parallel.hpp"
#include "vbpbb/pipeline.hpp"
#include "vbpbb/resample.hpp"
#include "vbpbb/rng.hpp"
#include "vbpbb/simulate.hpp"
#include "vbpbb/spectral.hpp"
#include "vbpbb/svg_plot.hpp"
#include "vbpbb/time_series.hpp"

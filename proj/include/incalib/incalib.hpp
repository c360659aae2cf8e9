#pragma once

// Umbrella header: the whole library.

#include "incalib/camera.hpp"
#include "incalib/depth_normal.hpp"
#include "incalib/errors.hpp"
#include "incalib/incidence.hpp"
#include "incalib/io.hpp"
#include "incalib/manipulation.hpp"
#include "incalib/metrics.hpp"
#include "incalib/ransac.hpp"
#include "incalib/raster.hpp"
#include "incalib/rng.hpp"
#include "incalib/synth.hpp"
#include "incalib/two_view.hpp"

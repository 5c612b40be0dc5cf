#pragma once

// Umbrella header: library, experiment drivers and run configuration.
#include "csphere/cache.hpp"
#include "csphere/config.hpp"
#include "csphere/experiments.hpp"
#include "csphere/geometry.hpp"
#include "csphere/kernels.hpp"
#include "csphere/sobolev.hpp"
#include "csphere/specfun.hpp"
#include "csphere/spectral.hpp"

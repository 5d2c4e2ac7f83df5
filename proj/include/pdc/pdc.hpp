#pragma once

#include "pdc/constants.hpp"
#include "pdc/correlations.hpp"
#include "pdc/crystal_io.hpp"
#include "pdc/dispersion.hpp"
#include "pdc/error.hpp"
#include "pdc/fft.hpp"
#include "pdc/grid.hpp"
#include "pdc/phasematch.hpp"
#include "pdc/spectra.hpp"
#include "pdc/topology.hpp"

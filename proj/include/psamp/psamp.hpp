#pragma once

#include "psamp/amplifier.hpp"
#include "psamp/amplitude.hpp"
#include "psamp/errors.hpp"
#include "psamp/fourier.hpp"
#include "psamp/grid.hpp"
#include "psamp/scan.hpp"
#include "psamp/schmidt.hpp"
#include "psamp/tpa.hpp"

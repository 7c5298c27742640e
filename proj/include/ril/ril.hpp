#pragma once

#include "ril/analysis.hpp"
#include "ril/exchange_kernel.hpp"
#include "ril/linalg.hpp"
#include "ril/manifest.hpp"
#include "ril/noise_mc.hpp"
#include "ril/objective.hpp"
#include "ril/optimize.hpp"
#include "ril/oracle.hpp"
#include "ril/search.hpp"
#include "ril/sequence_io.hpp"
#include "ril/sequences.hpp"
#include "ril/spin_basis.hpp"

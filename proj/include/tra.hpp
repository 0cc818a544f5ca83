#pragma once

#include "tra/error.hpp"
#include "tra/rng.hpp"
#include "tra/normal.hpp"
#include "tra/format.hpp"
#include "tra/geometry.hpp"
#include "tra/sample.hpp"
#include "tra/parallel.hpp"
#include "tra/regression.hpp"
#include "tra/copula.hpp"
#include "tra/topology.hpp"
#include "tra/scoring.hpp"
#include "tra/trac.hpp"
#include "tra/synth.hpp"
#include "tra/bench.hpp"

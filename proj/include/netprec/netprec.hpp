#pragma once

#include "netprec/errors.hpp"
#include "netprec/estimator.hpp"
#include "netprec/gaussian.hpp"
#include "netprec/io.hpp"
#include "netprec/linalg.hpp"
#include "netprec/matrix.hpp"
#include "netprec/parallel.hpp"
#include "netprec/rng.hpp"
#include "netprec/simulation.hpp"
#include "netprec/structure.hpp"
#include "netprec/tiger.hpp"

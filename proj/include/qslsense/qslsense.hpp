#pragma once

// Umbrella header for the whole library.

#include "qslsense/policy.hpp"
#include "qslsense/spinlin.hpp"
#include "qslsense/roots.hpp"
#include "qslsense/analytic.hpp"
#include "qslsense/sequence.hpp"
#include "qslsense/parallel.hpp"
#include "qslsense/labframe.hpp"
#include "qslsense/csv.hpp"
#include "qslsense/units.hpp"
#include "qslsense/response.hpp"
#include "qslsense/optimize.hpp"
#include "qslsense/datasets.hpp"
#include "qslsense/selfcheck.hpp"
#include "qslsense/cli.hpp"

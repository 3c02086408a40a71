#ifndef QDSWITCH_QDSWITCH_HPP
#define QDSWITCH_QDSWITCH_HPP

#include "qdswitch/config.hpp"
#include "qdswitch/cqed.hpp"
#include "qdswitch/csv.hpp"
#include "qdswitch/electrostatics.hpp"
#include "qdswitch/errors.hpp"
#include "qdswitch/fitting.hpp"
#include "qdswitch/least_squares.hpp"
#include "qdswitch/manifest.hpp"
#include "qdswitch/runs.hpp"
#include "qdswitch/switching.hpp"
#include "qdswitch/units.hpp"

#endif

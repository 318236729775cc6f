#pragma once

#include "cqed/analysis.hpp"
#include "cqed/config.hpp"
#include "cqed/correlations.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/error.hpp"
#include "cqed/hilbert.hpp"
#include "cqed/io.hpp"
#include "cqed/parallel.hpp"
#include "cqed/scan.hpp"
#include "cqed/trajectories.hpp"
#include "cqed/version.hpp"
#include "cqed/weakfield.hpp"

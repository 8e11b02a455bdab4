#pragma once

// Umbrella header.

#include "hjnet/action.hpp"
#include "hjnet/config.hpp"
#include "hjnet/curve.hpp"
#include "hjnet/errors.hpp"
#include "hjnet/expr.hpp"
#include "hjnet/hamiltonian.hpp"
#include "hjnet/network.hpp"
#include "hjnet/solver.hpp"
#include "hjnet/verify.hpp"

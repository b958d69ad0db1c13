#pragma once

#include "tsim/config.hpp"
#include "tsim/erasure.hpp"
#include "tsim/error.hpp"
#include "tsim/fock_basis.hpp"
#include "tsim/io.hpp"
#include "tsim/model.hpp"
#include "tsim/observables.hpp"
#include "tsim/propagator.hpp"
#include "tsim/protocol.hpp"
#include "tsim/state.hpp"

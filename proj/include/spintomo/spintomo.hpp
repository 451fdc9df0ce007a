#pragma once

#include "bloch_state.hpp"
#include "common.hpp"
#include "decay_models.hpp"
#include "event_engine.hpp"
#include "ggm_basis.hpp"
#include "golden_tables.hpp"
#include "io.hpp"
#include "kinematics.hpp"
#include "lhe.hpp"
#include "observables.hpp"
#include "quadrature.hpp"
#include "reduce.hpp"
#include "spin.hpp"
#include "table2.hpp"
#include "tomography.hpp"
#include "wigner_symbols.hpp"

#pragma once

#include "vfl/compat.hpp"
#include "vfl/config.hpp"
#include "vfl/dynamics.hpp"
#include "vfl/elliptic.hpp"
#include "vfl/field.hpp"
#include "vfl/grid.hpp"
#include "vfl/material.hpp"
#include "vfl/mms.hpp"
#include "vfl/norms.hpp"
#include "vfl/operators.hpp"
#include "vfl/runner.hpp"
#include "vfl/simulate.hpp"
#include "vfl/state.hpp"
#include "vfl/stepper.hpp"

#pragma once

#include "trajfb/agents.hpp"
#include "trajfb/check_suite.hpp"
#include "trajfb/dp.hpp"
#include "trajfb/envs.hpp"
#include "trajfb/errors.hpp"
#include "trajfb/estimator.hpp"
#include "trajfb/harness.hpp"
#include "trajfb/mdp.hpp"
#include "trajfb/oracles.hpp"
#include "trajfb/rng.hpp"
#include "trajfb/types.hpp"

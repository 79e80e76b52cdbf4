#pragma once

#include "vulcan/errors.hpp"
#include "vulcan/functionals.hpp"
#include "vulcan/history.hpp"
#include "vulcan/model.hpp"
#include "vulcan/oracle.hpp"
#include "vulcan/outcome.hpp"
#include "vulcan/planners/forward_search.hpp"
#include "vulcan/planners/mcts.hpp"
#include "vulcan/policy.hpp"
#include "vulcan/risk.hpp"
#include "vulcan/risk_bound.hpp"
#include "vulcan/rng.hpp"
#include "vulcan/version.hpp"

#include "vulcan/domains/bandit.hpp"
#include "vulcan/domains/fig2.hpp"
#include "vulcan/domains/gp.hpp"
#include "vulcan/domains/random_ccmdp.hpp"

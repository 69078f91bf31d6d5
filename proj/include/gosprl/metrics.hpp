#pragma once

#include <vector>

#include "gosprl/estimation.hpp"
#include "gosprl/requirements.hpp"

namespace gosprl {

/// P_t: fraction of states whose requirement is met.
double proportion_satisfied(const Counters& counters, const RequirementSchedule& schedule);

/// ||p_hat(.|s,a) - p(.|s,a)||_1 per pair; unvisited pairs count as 1.
std::vector<double> pair_l1_errors(const Counters& counters, const TabularMdp& mdp);

/// E_t: mean of pair_l1_errors.
double model_error(const Counters& counters, const TabularMdp& mdp);

}  // namespace gosprl

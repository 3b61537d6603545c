#pragma once

#include "concentra/core.hpp"
#include "concentra/distribution.hpp"
#include "concentra/risk_measures.hpp"
#include "concentra/scenario_set.hpp"
#include "concentra/concentration.hpp"
#include "concentra/axiom_harness.hpp"
#include "concentra/simplex.hpp"
#include "concentra/portfolio.hpp"
#include "concentra/copula.hpp"
#include "concentra/io.hpp"

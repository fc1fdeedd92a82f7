#pragma once

#include "addressing.hpp"
#include "body.hpp"
#include "dot.hpp"
#include "dsl.hpp"
#include "elaborate.hpp"
#include "graph.hpp"
#include "model.hpp"
#include "netmodels.hpp"
#include "policy.hpp"
#include "promise_core.hpp"
#include "simulator.hpp"
#include "verifier.hpp"

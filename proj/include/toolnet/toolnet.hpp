#pragma once

#include "toolnet/construction.hpp"
#include "toolnet/dot.hpp"
#include "toolnet/error.hpp"
#include "toolnet/graph.hpp"
#include "toolnet/io.hpp"
#include "toolnet/navigation.hpp"
#include "toolnet/retrieval.hpp"
#include "toolnet/scenario_io.hpp"
#include "toolnet/simulation.hpp"

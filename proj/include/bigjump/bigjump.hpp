#pragma once

#include "asymptotics.hpp"
#include "config.hpp"
#include "dist.hpp"
#include "errors.hpp"
#include "estimate.hpp"
#include "experiment.hpp"
#include "montecarlo.hpp"
#include "process.hpp"
#include "simulate.hpp"
#include "tailmath.hpp"

#pragma once

#include "core.hpp"
#include "rng.hpp"
#include "predicates.hpp"
#include "scorers.hpp"
#include "sampling.hpp"
#include "quantification.hpp"
#include "lws.hpp"
#include "stratification.hpp"
#include "lss.hpp"
#include "synth.hpp"
#include "harness.hpp"

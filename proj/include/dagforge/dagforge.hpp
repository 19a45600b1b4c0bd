#pragma once

// Umbrella header: the whole library in one include.

#include "dagforge/common.hpp"
#include "dagforge/dag.hpp"
#include "dagforge/dataset.hpp"
#include "dagforge/gp.hpp"
#include "dagforge/io.hpp"
#include "dagforge/json_io.hpp"
#include "dagforge/metrics.hpp"
#include "dagforge/policy.hpp"
#include "dagforge/postprocess.hpp"
#include "dagforge/regression.hpp"
#include "dagforge/scoring.hpp"
#include "dagforge/synth.hpp"
#include "dagforge/train.hpp"
#include "dagforge/vec2dag.hpp"

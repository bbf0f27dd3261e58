#pragma once

#include "qlab/collapse.hpp"
#include "qlab/composite.hpp"
#include "qlab/density.hpp"
#include "qlab/errors.hpp"
#include "qlab/fine_grain.hpp"
#include "qlab/frame_rules.hpp"
#include "qlab/noncontextuality.hpp"
#include "qlab/random.hpp"
#include "qlab/rational.hpp"
#include "qlab/sandwich.hpp"
#include "qlab/scalar_rule.hpp"
#include "qlab/schmidt.hpp"
#include "qlab/state.hpp"
#include "qlab/tolerances.hpp"

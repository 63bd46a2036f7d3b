#pragma once

#include "hasc/core.hpp"
#include "hasc/random.hpp"
#include "hasc/index_calculus.hpp"
#include "hasc/hypothesis.hpp"
#include "hasc/samples.hpp"
#include "hasc/losses.hpp"
#include "hasc/realizability.hpp"
#include "hasc/schemes.hpp"
#include "hasc/learner.hpp"
#include "hasc/serialization.hpp"
#include "hasc/config.hpp"
#include "hasc/experiments.hpp"

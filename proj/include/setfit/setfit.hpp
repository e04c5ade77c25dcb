#pragma once

#include "setfit/corpus.hpp"
#include "setfit/cost.hpp"
#include "setfit/distill.hpp"
#include "setfit/encoder.hpp"
#include "setfit/error.hpp"
#include "setfit/harness.hpp"
#include "setfit/head.hpp"
#include "setfit/metrics.hpp"
#include "setfit/model_io.hpp"
#include "setfit/pairs.hpp"
#include "setfit/pipeline.hpp"
#include "setfit/rng.hpp"
#include "setfit/synthetic.hpp"

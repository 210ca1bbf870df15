#pragma once

// Umbrella header for the QFAN library: a block-autoregressive generative
// model built from a shared small parameterized quantum circuit (simulated),
// count-sketch conditioning, closed-form ridge decoding, SPSA training under
// an MMD^2 objective, and a post-hoc gated residual sampler.

#include "qfan/ablation.hpp"
#include "qfan/baselines.hpp"
#include "qfan/bundle_io.hpp"
#include "qfan/circuit.hpp"
#include "qfan/common.hpp"
#include "qfan/config.hpp"
#include "qfan/data.hpp"
#include "qfan/errors.hpp"
#include "qfan/generation.hpp"
#include "qfan/metrics.hpp"
#include "qfan/mmd.hpp"
#include "qfan/model.hpp"
#include "qfan/report_io.hpp"
#include "qfan/residual.hpp"
#include "qfan/ridge.hpp"
#include "qfan/rng.hpp"
#include "qfan/sketch.hpp"
#include "qfan/theory.hpp"
#include "qfan/training.hpp"

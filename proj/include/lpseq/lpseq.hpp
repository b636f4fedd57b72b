#pragma once

#include "lpseq/errors.hpp"
#include "lpseq/norms.hpp"
#include "lpseq/scalar_shrinkage.hpp"
#include "lpseq/lp_ball.hpp"
#include "lpseq/lp_projection.hpp"
#include "lpseq/estimators.hpp"
#include "lpseq/rates.hpp"
#include "lpseq/hard_instances.hpp"
#include "lpseq/rng.hpp"
#include "lpseq/simulation.hpp"
#include "lpseq/verification.hpp"

#pragma once

#include "aoa_auth/attacks.hpp"
#include "aoa_auth/config.hpp"
#include "aoa_auth/errors.hpp"
#include "aoa_auth/estimator.hpp"
#include "aoa_auth/harness.hpp"
#include "aoa_auth/metrics.hpp"
#include "aoa_auth/occ.hpp"
#include "aoa_auth/rng.hpp"
#include "aoa_auth/signal_model.hpp"

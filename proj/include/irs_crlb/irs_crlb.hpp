#pragma once

#include "irs_crlb/types.hpp"
#include "irs_crlb/geometry.hpp"
#include "irs_crlb/signal_model.hpp"
#include "irs_crlb/fisher.hpp"
#include "irs_crlb/scene.hpp"
#include "irs_crlb/parallel.hpp"
#include "irs_crlb/optimizer.hpp"
#include "irs_crlb/scenario.hpp"
#include "irs_crlb/sweep.hpp"

#pragma once

#include "ordinal/numeric.hpp"
#include "ordinal/core.hpp"
#include "ordinal/softlabel.hpp"
#include "ordinal/losses.hpp"
#include "ordinal/clm.hpp"
#include "ordinal/metrics.hpp"
#include "ordinal/model.hpp"
#include "ordinal/ensemble.hpp"
#include "ordinal/stats.hpp"
#include "ordinal/pipeline.hpp"

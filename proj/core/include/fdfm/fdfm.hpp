#pragma once

#include "fdfm/artime.hpp"
#include "fdfm/baselines.hpp"
#include "fdfm/config.hpp"
#include "fdfm/dataio.hpp"
#include "fdfm/errors.hpp"
#include "fdfm/evaluation.hpp"
#include "fdfm/forecasters.hpp"
#include "fdfm/model.hpp"
#include "fdfm/panel.hpp"
#include "fdfm/serialize.hpp"
#include "fdfm/simulate.hpp"
#include "fdfm/spline.hpp"
#include "fdfm/trading.hpp"

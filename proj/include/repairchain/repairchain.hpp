#pragma once

#include "errors.hpp"
#include "numeric.hpp"
#include "model.hpp"
#include "json_io.hpp"
#include "series_tools.hpp"
#include "decay.hpp"
#include "return_time.hpp"
#include "last_exit.hpp"
#include "sim.hpp"

#pragma once

#include "becmet/errors.hpp"
#include "becmet/physical_config.hpp"
#include "becmet/config_file.hpp"
#include "becmet/dicke.hpp"
#include "becmet/metrology.hpp"
#include "becmet/trap_scaling.hpp"
#include "becmet/tf_analytics.hpp"
#include "becmet/parallel.hpp"
#include "becmet/gp_solver.hpp"
#include "becmet/counting.hpp"
#include "becmet/csv.hpp"

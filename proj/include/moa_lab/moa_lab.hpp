#pragma once

#include "moa_lab/bit_adders.hpp"
#include "moa_lab/commands.hpp"
#include "moa_lab/csv.hpp"
#include "moa_lab/errors.hpp"
#include "moa_lab/fpga_cost.hpp"
#include "moa_lab/layer_dhm.hpp"
#include "moa_lab/moa_tree.hpp"
#include "moa_lab/parallel.hpp"
#include "moa_lab/scm.hpp"
#include "moa_lab/serial_moa.hpp"

#pragma once

// LSTM-on-passive-RRAM-crossbar simulator: device model, analog crossbar,
// differential-pair network mapping, Manhattan-rule in-situ training, and
// energy/area accounting.

#include "xbarlstm/config.hpp"
#include "xbarlstm/crossbar.hpp"
#include "xbarlstm/data.hpp"
#include "xbarlstm/device.hpp"
#include "xbarlstm/experiment.hpp"
#include "xbarlstm/io.hpp"
#include "xbarlstm/matrix.hpp"
#include "xbarlstm/metrics.hpp"
#include "xbarlstm/network.hpp"
#include "xbarlstm/rng.hpp"
#include "xbarlstm/training.hpp"

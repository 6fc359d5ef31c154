#pragma once

// Umbrella header: response characterization toolkit for desk-scale LSTMs.

#include "lstmscope/ablation.hpp"
#include "lstmscope/capacity.hpp"
#include "lstmscope/cell.hpp"
#include "lstmscope/config.hpp"
#include "lstmscope/dataset.hpp"
#include "lstmscope/errors.hpp"
#include "lstmscope/linalg.hpp"
#include "lstmscope/lstm.hpp"
#include "lstmscope/metrics.hpp"
#include "lstmscope/model_io.hpp"
#include "lstmscope/report.hpp"
#include "lstmscope/signal.hpp"
#include "lstmscope/svg.hpp"
#include "lstmscope/train.hpp"

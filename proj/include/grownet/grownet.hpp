#pragma once

#include "grownet/bench.hpp"
#include "grownet/data.hpp"
#include "grownet/dataset.hpp"
#include "grownet/embedding.hpp"
#include "grownet/errors.hpp"
#include "grownet/functions.hpp"
#include "grownet/gradient.hpp"
#include "grownet/io.hpp"
#include "grownet/lbfgs.hpp"
#include "grownet/network.hpp"
#include "grownet/stationarity.hpp"
#include "grownet/topology.hpp"
#include "grownet/training.hpp"

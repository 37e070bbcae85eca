#pragma once

#include <prosumpi/backtest.hpp>
#include <prosumpi/clustering.hpp>
#include <prosumpi/csv.hpp>
#include <prosumpi/domain.hpp>
#include <prosumpi/error.hpp>
#include <prosumpi/estimator.hpp>
#include <prosumpi/histogram.hpp>
#include <prosumpi/metrics.hpp>
#include <prosumpi/resample.hpp>
#include <prosumpi/snapshot.hpp>
#include <prosumpi/sweep.hpp>
#include <prosumpi/synthetic.hpp>
#include <prosumpi/timeseries.hpp>

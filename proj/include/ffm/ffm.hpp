#ifndef FFM_FFM_HPP
#define FFM_FFM_HPP

#include "ffm/backtest.hpp"
#include "ffm/core.hpp"
#include "ffm/dns.hpp"
#include "ffm/fpca.hpp"
#include "ffm/h15.hpp"
#include "ffm/io.hpp"
#include "ffm/monte_carlo.hpp"
#include "ffm/parallel.hpp"
#include "ffm/pipeline.hpp"
#include "ffm/random.hpp"
#include "ffm/selection.hpp"
#include "ffm/simulate.hpp"
#include "ffm/spline.hpp"
#include "ffm/var.hpp"

#endif  // FFM_FFM_HPP

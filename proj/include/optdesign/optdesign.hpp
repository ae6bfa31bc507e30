#pragma once

// Umbrella header.

#include "optdesign/errors.hpp"
#include "optdesign/symlin.hpp"
#include "optdesign/criteria.hpp"
#include "optdesign/problem.hpp"
#include "optdesign/report.hpp"
#include "optdesign/ipsolver.hpp"
#include "optdesign/multsolver.hpp"
#include "optdesign/io.hpp"
#include "optdesign/bench.hpp"
#include "optdesign/verify.hpp"

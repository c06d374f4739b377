#pragma once

// Convenience umbrella: pulls in the whole library in dependency order.

#include "qkzlab/params.hpp"
#include "qkzlab/tensor.hpp"
#include "qkzlab/laurent.hpp"
#include "qkzlab/algebra.hpp"
#include "qkzlab/elliptic.hpp"
#include "qkzlab/ratfun.hpp"
#include "qkzlab/hyperint.hpp"
#include "qkzlab/qkz.hpp"
#include "qkzlab/report.hpp"
#include "qkzlab/suites.hpp"
#include "qkzlab/config.hpp"

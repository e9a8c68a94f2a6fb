#pragma once

#include "isocorr/common.hpp"
#include "isocorr/spaces.hpp"
#include "isocorr/operators.hpp"
#include "isocorr/witness.hpp"
#include "isocorr/sampling.hpp"
#include "isocorr/estimation.hpp"
#include "isocorr/io.hpp"
#include "isocorr/selftest.hpp"

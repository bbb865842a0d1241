#pragma once

#include "gridcode/codec.hpp"
#include "gridcode/constraint.hpp"
#include "gridcode/errors.hpp"
#include "gridcode/pairgraph.hpp"
#include "gridcode/report.hpp"
#include "gridcode/spectral.hpp"
#include "gridcode/subopt.hpp"

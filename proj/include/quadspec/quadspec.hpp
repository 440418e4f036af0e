#pragma once

#include "common.hpp"
#include "quadform.hpp"
#include "singular_space.hpp"
#include "decomposition.hpp"
#include "spectrum.hpp"
#include "galerkin.hpp"
#include "report.hpp"

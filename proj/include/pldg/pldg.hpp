#pragma once

#include "pldg/constitutive.hpp"
#include "pldg/dgops.hpp"
#include "pldg/errors.hpp"
#include "pldg/femspace.hpp"
#include "pldg/manufactured.hpp"
#include "pldg/mesh.hpp"
#include "pldg/quadrature.hpp"
#include "pldg/series.hpp"
#include "pldg/solver.hpp"
#include "pldg/system.hpp"

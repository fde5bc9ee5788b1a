#pragma once

#include "fracvar/admissibility.hpp"
#include "fracvar/cli.hpp"
#include "fracvar/deformation.hpp"
#include "fracvar/density.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/mesh.hpp"
#include "fracvar/minimizer.hpp"
#include "fracvar/noninterpenetration.hpp"
#include "fracvar/surfaces.hpp"
#include "fracvar/tensor.hpp"
#include "fracvar/varifold.hpp"

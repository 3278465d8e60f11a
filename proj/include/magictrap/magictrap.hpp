#pragma once

#include "magictrap/angular.hpp"
#include "magictrap/half_integer.hpp"
#include "magictrap/hamiltonian.hpp"
#include "magictrap/magic.hpp"
#include "magictrap/molecule.hpp"
#include "magictrap/pendular.hpp"
#include "magictrap/scenario.hpp"
#include "magictrap/spectrum.hpp"
#include "magictrap/sweep.hpp"

#pragma once

// Monotone semi-discrete finite differences for periodic 1-D Hamilton-Jacobi
// equations: forward solver, adjoint measures, exact-solution oracles, and a
// convergence-study harness.

#include "hjfd/adjoint.hpp"
#include "hjfd/discrete_calculus.hpp"
#include "hjfd/errors.hpp"
#include "hjfd/grid.hpp"
#include "hjfd/hamiltonian.hpp"
#include "hjfd/harness.hpp"
#include "hjfd/initial_data.hpp"
#include "hjfd/linear_toy.hpp"
#include "hjfd/numerical_flux.hpp"
#include "hjfd/oracle.hpp"
#include "hjfd/solver.hpp"

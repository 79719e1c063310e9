#pragma once

#include "bloch.hpp"
#include "common.hpp"
#include "csv.hpp"
#include "disorder.hpp"
#include "ensemble.hpp"
#include "flux.hpp"
#include "hamiltonian.hpp"
#include "models.hpp"
#include "observables.hpp"
#include "operators.hpp"
#include "runner.hpp"
#include "scaling.hpp"
#include "spectral.hpp"
#include "torus.hpp"

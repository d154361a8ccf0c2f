#pragma once

#include "htqft/circuit.hpp"
#include "htqft/evolve.hpp"
#include "htqft/fock.hpp"
#include "htqft/format.hpp"
#include "htqft/matelem.hpp"
#include "htqft/model.hpp"
#include "htqft/pauli.hpp"
#include "htqft/spectrum.hpp"

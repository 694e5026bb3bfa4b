#pragma once

// Convenience header pulling in the whole toolkit.

#include "attractor/attractive.hpp"
#include "attractor/classes.hpp"
#include "attractor/errors.hpp"
#include "attractor/experiment.hpp"
#include "attractor/io.hpp"
#include "attractor/iterate.hpp"
#include "attractor/mappings.hpp"
#include "attractor/space.hpp"

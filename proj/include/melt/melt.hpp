#pragma once

// Umbrella header: the whole library except the CLI layer (include
// melt/cli.hpp separately; it drags in the vendored argument parser).

#include "cg.hpp"
#include "cholesky.hpp"
#include "errors.hpp"
#include "gmrf.hpp"
#include "logdet.hpp"
#include "matrix_market.hpp"
#include "maxent.hpp"
#include "probe.hpp"
#include "quadrature.hpp"
#include "rng.hpp"
#include "sparse.hpp"
#include "spectral.hpp"
#include "synthetic.hpp"

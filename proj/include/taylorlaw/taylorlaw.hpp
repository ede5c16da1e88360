#pragma once

#include "taylorlaw/csr.hpp"
#include "taylorlaw/decomp.hpp"
#include "taylorlaw/equilibrium.hpp"
#include "taylorlaw/error.hpp"
#include "taylorlaw/geoproj.hpp"
#include "taylorlaw/grid.hpp"
#include "taylorlaw/io.hpp"
#include "taylorlaw/pipeline.hpp"
#include "taylorlaw/pointgen.hpp"
#include "taylorlaw/report.hpp"
#include "taylorlaw/taylor.hpp"

#pragma once

// Umbrella header for the kronfit library.

#include "kronfit/cli.hpp"
#include "kronfit/csv.hpp"
#include "kronfit/design.hpp"
#include "kronfit/eigensym.hpp"
#include "kronfit/infer.hpp"
#include "kronfit/kalg.hpp"
#include "kronfit/linalg.hpp"
#include "kronfit/matfun.hpp"
#include "kronfit/matrix.hpp"
#include "kronfit/mc.hpp"
#include "kronfit/mdest.hpp"
#include "kronfit/moments.hpp"
#include "kronfit/prob.hpp"
#include "kronfit/qmle.hpp"
#include "kronfit/rng.hpp"
#include "kronfit/shrink.hpp"

#pragma once

#include "qlbart/data.hpp"
#include "qlbart/dispersion.hpp"
#include "qlbart/draws.hpp"
#include "qlbart/ensemble.hpp"
#include "qlbart/errors.hpp"
#include "qlbart/family.hpp"
#include "qlbart/hyper.hpp"
#include "qlbart/io.hpp"
#include "qlbart/leaf_model.hpp"
#include "qlbart/moves.hpp"
#include "qlbart/parametric.hpp"
#include "qlbart/rng.hpp"
#include "qlbart/sampler.hpp"
#include "qlbart/slice.hpp"
#include "qlbart/special.hpp"
#include "qlbart/summaries.hpp"
#include "qlbart/synth.hpp"
#include "qlbart/tree.hpp"
#include "qlbart/tree_prior.hpp"

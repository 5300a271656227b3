#pragma once

#include "shapepal/analysis.hpp"
#include "shapepal/catalog.hpp"
#include "shapepal/error.hpp"
#include "shapepal/fixture.hpp"
#include "shapepal/pairwise.hpp"
#include "shapepal/palette_engine.hpp"
#include "shapepal/planner.hpp"
#include "shapepal/rng.hpp"
#include "shapepal/service.hpp"
#include "shapepal/stats.hpp"
#include "shapepal/stimulus.hpp"
#include "shapepal/svg.hpp"
#include "shapepal/trials.hpp"
#include "shapepal/version.hpp"

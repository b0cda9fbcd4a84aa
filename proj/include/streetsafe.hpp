#pragma once

// Umbrella header for the streetsafe library.

#include "streetsafe/activity.hpp"
#include "streetsafe/correlation.hpp"
#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/geo.hpp"
#include "streetsafe/geodata.hpp"
#include "streetsafe/geojson.hpp"
#include "streetsafe/griffith.hpp"
#include "streetsafe/image.hpp"
#include "streetsafe/moran.hpp"
#include "streetsafe/occlusion.hpp"
#include "streetsafe/ols.hpp"
#include "streetsafe/pipeline.hpp"
#include "streetsafe/process_scorer.hpp"
#include "streetsafe/random.hpp"
#include "streetsafe/ranking.hpp"
#include "streetsafe/regression.hpp"
#include "streetsafe/scorer.hpp"
#include "streetsafe/stepwise.hpp"
#include "streetsafe/transform.hpp"
#include "streetsafe/weights.hpp"

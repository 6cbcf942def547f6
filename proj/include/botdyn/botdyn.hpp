// Umbrella header.
#pragma once

#include "botdyn/common.hpp"
#include "botdyn/cssr.hpp"
#include "botdyn/features.hpp"
#include "botdyn/ingest.hpp"
#include "botdyn/io.hpp"
#include "botdyn/measures.hpp"
#include "botdyn/pipeline.hpp"
#include "botdyn/regression.hpp"
#include "botdyn/report.hpp"
#include "botdyn/sequencing.hpp"
#include "botdyn/simulate.hpp"

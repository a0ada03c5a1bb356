#pragma once

#include "morphcx/arborescence.hpp"
#include "morphcx/complexity.hpp"
#include "morphcx/config.hpp"
#include "morphcx/corpus.hpp"
#include "morphcx/error.hpp"
#include "morphcx/pipeline.hpp"
#include "morphcx/platbaseline.hpp"
#include "morphcx/report.hpp"
#include "morphcx/stats.hpp"
#include "morphcx/strmodel.hpp"
#include "morphcx/structure.hpp"

#pragma once

#include "lingdist/conceptualizer.hpp"
#include "lingdist/core.hpp"
#include "lingdist/error.hpp"
#include "lingdist/eval.hpp"
#include "lingdist/ingest.hpp"
#include "lingdist/metrics.hpp"
#include "lingdist/parallel.hpp"
#include "lingdist/report.hpp"
#include "lingdist/unicode.hpp"

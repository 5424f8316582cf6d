#pragma once

#include "tinycore/approx.hpp"
#include "tinycore/bregman.hpp"
#include "tinycore/clustering.hpp"
#include "tinycore/coreset.hpp"
#include "tinycore/dimred.hpp"
#include "tinycore/error.hpp"
#include "tinycore/io.hpp"
#include "tinycore/kmeans_coreset.hpp"
#include "tinycore/linalg.hpp"
#include "tinycore/queries.hpp"
#include "tinycore/random.hpp"
#include "tinycore/sensitivity.hpp"
#include "tinycore/streaming.hpp"
#include "tinycore/subspace_coreset.hpp"

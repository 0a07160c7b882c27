#pragma once

#include "dbnmon/bench.hpp"
#include "dbnmon/clustering.hpp"
#include "dbnmon/dense.hpp"
#include "dbnmon/errors.hpp"
#include "dbnmon/exact.hpp"
#include "dbnmon/filters.hpp"
#include "dbnmon/generators.hpp"
#include "dbnmon/io.hpp"
#include "dbnmon/junction_tree.hpp"
#include "dbnmon/metrics.hpp"
#include "dbnmon/model.hpp"
#include "dbnmon/particle_table.hpp"
#include "dbnmon/rng.hpp"
#include "dbnmon/sample_join.hpp"
#include "dbnmon/sampling.hpp"

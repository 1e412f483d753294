#pragma once

#include "coreset/errors.hpp"
#include "coreset/rng.hpp"
#include "coreset/metric.hpp"
#include "coreset/weighted_set.hpp"
#include "coreset/solvers.hpp"
#include "coreset/assignment.hpp"
#include "coreset/coreset.hpp"
#include "coreset/bicriterion.hpp"
#include "coreset/stream_bicriterion.hpp"
#include "coreset/stream_sampler.hpp"
#include "coreset/streaming.hpp"
#include "coreset/merge_reduce.hpp"
#include "coreset/harness.hpp"
#include "coreset/property_suite.hpp"

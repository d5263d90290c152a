#pragma once

#include "kbq/annotations.hpp"
#include "kbq/csv.hpp"
#include "kbq/dataset.hpp"
#include "kbq/error.hpp"
#include "kbq/evolution.hpp"
#include "kbq/features.hpp"
#include "kbq/histogram.hpp"
#include "kbq/learn.hpp"
#include "kbq/ntriples.hpp"
#include "kbq/prefixes.hpp"
#include "kbq/profiler.hpp"
#include "kbq/random.hpp"
#include "kbq/rdf.hpp"
#include "kbq/registry.hpp"
#include "kbq/remote_profile.hpp"
#include "kbq/shapes.hpp"
#include "kbq/smote.hpp"
#include "kbq/snapshot.hpp"
#include "kbq/sparql.hpp"
#include "kbq/stats.hpp"
